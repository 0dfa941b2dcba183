"""Dataset ingestion, placeholder masking, serialization and stratified splitting."""

from __future__ import annotations

import csv
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import requests

from .errors import AuthError, FetchError, IngestError
from .seeding import rng_for
from .taxonomy import BasicEmotion

NEUTRAL_STRATUM = "__neutral__"

_CODE_RE = re.compile(r"```.*?```|`[^`\n]*`", re.S)
_URL_RE = re.compile(r"https?://\S+")
_MENTION_RE = re.compile(r"@[A-Za-z0-9-]+")
_WS_RE = re.compile(r"\s+")


def preprocess_text(raw: str) -> str:
    """Mask code spans, URLs and @-mentions; collapse whitespace.

    Code is masked first so URLs and mentions inside backticks do not leave
    partial placeholders behind. Stop words and all other characters are kept.
    Idempotent: placeholders contain none of the trigger characters.
    """
    text = _CODE_RE.sub("<code>", raw)
    text = _URL_RE.sub("<url>", text)
    text = _MENTION_RE.sub("<username>", text)
    return _WS_RE.sub(" ", text).strip()


@dataclass
class Utterance:
    id: str
    raw_text: str
    masked_text: str
    labels: frozenset[BasicEmotion] = frozenset()
    secondary_labels: Optional[list[str]] = None
    source: Optional[dict] = None

    def to_record(self) -> dict:
        rec: dict = {
            "id": self.id,
            "text": self.raw_text,
            "labels": sorted(e.value for e in self.labels),
        }
        if self.secondary_labels:
            rec["secondary"] = list(self.secondary_labels)
        if self.source:
            rec["source"] = dict(self.source)
        return rec


@dataclass
class Dataset:
    instances: list[Utterance]
    provenance: str = ""

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for u in self.instances:
            if u.id in seen:
                raise IngestError(f"duplicate utterance id: {u.id!r}")
            seen.add(u.id)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def ids(self) -> set[str]:
        return {u.id for u in self.instances}


@dataclass
class SplitResult:
    train: Dataset
    test: Dataset
    ratio: float
    seed: int


def _parse_labels(values: Iterable[str], lineno: int) -> frozenset[BasicEmotion]:
    labels = set()
    for v in values:
        v = v.strip()
        if not v:
            continue
        try:
            labels.add(BasicEmotion.parse(v))
        except Exception:
            raise IngestError(f"line {lineno}: unknown basic emotion label {v!r}")
    return frozenset(labels)


def _utterance_from_record(rec: dict, lineno: int) -> Utterance:
    for fld in ("id", "text"):
        if fld not in rec:
            raise IngestError(f"line {lineno}: missing field {fld!r}")
    raw = rec["text"]
    if not isinstance(raw, str):
        raise IngestError(f"line {lineno}: field 'text' must be a string")
    labels_raw = rec.get("labels", [])
    if not isinstance(labels_raw, list):
        raise IngestError(f"line {lineno}: field 'labels' must be a list")
    return Utterance(
        id=str(rec["id"]),
        raw_text=raw,
        masked_text=rec.get("masked") or preprocess_text(raw),
        labels=_parse_labels(labels_raw, lineno),
        secondary_labels=rec.get("secondary"),
        source=rec.get("source"),
    )


def ingest(path: str | Path, format: str | None = None) -> Dataset:
    """Load a labeled dataset from JSONL or CSV (id,text,labels)."""
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    instances: list[Utterance] = []
    if format == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IngestError(f"line {lineno}: invalid JSON ({exc})")
                instances.append(_utterance_from_record(rec, lineno))
    elif format == "csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "text", "labels"}.issubset(reader.fieldnames):
                raise IngestError(f"{path}: CSV must have columns id,text,labels")
            for lineno, row in enumerate(reader, start=2):
                rec = {
                    "id": row["id"],
                    "text": row["text"],
                    "labels": [s for s in (row["labels"] or "").split(";") if s.strip()],
                }
                instances.append(_utterance_from_record(rec, lineno))
    else:
        raise IngestError(f"unknown dataset format: {format!r}")
    return Dataset(instances, provenance=str(path))


def save_jsonl(ds: Dataset, path: str | Path, masked: bool = False) -> None:
    """Write a dataset as JSONL. With masked=True the text field carries masked_text."""
    with open(path, "w", encoding="utf-8") as fh:
        for u in ds:
            rec = u.to_record()
            if masked:
                rec["text"] = u.masked_text
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _strata(u: Utterance) -> list[str]:
    if not u.labels:
        return [NEUTRAL_STRATUM]
    return sorted(e.value for e in u.labels)


def stratified_split(ds: Dataset, ratio: float, seed: int) -> SplitResult:
    """Greedy iterative stratification over (multi-)label sets.

    Instances of the currently rarest label are assigned first, each to the
    fold with the greatest remaining demand for that label. Unlabeled
    instances form their own stratum. Deterministic given the seed.
    """
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0,1), got {ratio}")
    if len(ds) == 0:
        raise ValueError("cannot split an empty dataset")

    rng = rng_for(seed, "split")
    n = len(ds)
    test_cap = round(ratio * n)
    caps = {"test": test_cap, "train": n - test_cap}

    by_label: dict[str, list[Utterance]] = {}
    for u in ds:
        for lab in _strata(u):
            by_label.setdefault(lab, []).append(u)
    desire: dict[str, dict[str, float]] = {
        "test": {lab: ratio * len(v) for lab, v in by_label.items()},
        "train": {lab: (1 - ratio) * len(v) for lab, v in by_label.items()},
    }
    for pool in by_label.values():
        rng.shuffle(pool)

    assigned: dict[str, str] = {}
    while any(by_label.values()):
        label = min(
            (lab for lab, pool in by_label.items() if pool),
            key=lambda lab: (len(by_label[lab]), lab),
        )
        for u in list(by_label[label]):
            folds = [f for f in ("test", "train") if caps[f] > 0]
            if len(folds) > 1:
                folds.sort(key=lambda f: (-desire[f][label], -caps[f], f))
                if (desire[folds[0]][label], caps[folds[0]]) == (
                    desire[folds[1]][label], caps[folds[1]]
                ):
                    folds = [rng.choice(folds)]
            fold = folds[0]
            assigned[u.id] = fold
            caps[fold] -= 1
            for lab in _strata(u):
                desire[fold][lab] -= 1
                by_label[lab].remove(u)

    _repair_assignment(ds, assigned, ratio)

    train = [u for u in ds if assigned[u.id] == "train"]
    test = [u for u in ds if assigned[u.id] == "test"]
    return SplitResult(
        train=Dataset(train, provenance=f"{ds.provenance}#train"),
        test=Dataset(test, provenance=f"{ds.provenance}#test"),
        ratio=ratio,
        seed=seed,
    )


def _repair_assignment(ds: Dataset, assigned: dict[str, str], ratio: float) -> None:
    """Swap instances between folds until every stratum's test share is
    within one instance of its proportional target.

    The greedy pass above can overshoot by more than one for labels that
    co-occur with others; equal-size swaps fix that without disturbing the
    fold sizes. Swaps are applied only while they strictly reduce the total
    out-of-tolerance mass, so the loop always terminates.
    """
    totals: dict[str, int] = {}
    test_counts: dict[str, int] = {}
    for u in ds:
        for lab in _strata(u):
            totals[lab] = totals.get(lab, 0) + 1
            if assigned[u.id] == "test":
                test_counts[lab] = test_counts.get(lab, 0) + 1

    def excess(lab: str) -> float:
        dev = abs(test_counts.get(lab, 0) - ratio * totals[lab])
        return max(0.0, dev - 1.0)

    def total_excess() -> float:
        return sum(excess(lab) for lab in totals)

    current = total_excess()
    while current > 0:
        best = None
        for u in ds:
            if assigned[u.id] != "test":
                continue
            for v in ds:
                if assigned[v.id] != "train" or u.labels == v.labels:
                    continue
                for lab in _strata(u):
                    test_counts[lab] -= 1
                for lab in _strata(v):
                    test_counts[lab] = test_counts.get(lab, 0) + 1
                candidate = total_excess()
                for lab in _strata(u):
                    test_counts[lab] += 1
                for lab in _strata(v):
                    test_counts[lab] -= 1
                if candidate < current and (best is None or candidate < best[0]):
                    best = (candidate, u.id, v.id, _strata(u), _strata(v))
        if best is None:
            break
        current, uid, vid, u_labs, v_labs = best
        assigned[uid] = "train"
        assigned[vid] = "test"
        for lab in u_labs:
            test_counts[lab] -= 1
        for lab in v_labs:
            test_counts[lab] = test_counts.get(lab, 0) + 1


GITHUB_API = "https://api.github.com"
_MAX_RATE_WAITS = 3


def fetch_comments(
    repo: str,
    kind: str,
    limit: int,
    auth_token: str | None = None,
    session: Optional[requests.Session] = None,
    api_base: str = GITHUB_API,
    sleep=time.sleep,
) -> Dataset:
    """Fetch up to `limit` most recent issue or pull-request comments.

    Paginates through the REST endpoint, honoring rate-limit headers by
    sleeping until the advertised reset (at most three waits).
    """
    if kind not in ("issues", "pulls"):
        raise ValueError(f"kind must be 'issues' or 'pulls', got {kind!r}")
    if "/" not in repo:
        raise ValueError(f"repo must be 'owner/name', got {repo!r}")
    if limit <= 0:
        return Dataset([], provenance=f"{repo}:{kind}")

    session = session or requests.Session()
    headers = {"Accept": "application/vnd.github+json"}
    if auth_token:
        headers["Authorization"] = f"token {auth_token}"

    owner, name = repo.split("/", 1)
    url = f"{api_base}/repos/{owner}/{name}/{kind}/comments"
    instances: list[Utterance] = []
    page = 1
    waits = 0
    while len(instances) < limit:
        resp = session.get(
            url,
            headers=headers,
            params={
                "per_page": min(100, limit),
                "page": page,
                "sort": "created",
                "direction": "desc",
            },
            timeout=30,
        )
        if resp.status_code == 401:
            raise AuthError(f"authentication failed fetching {repo} ({resp.status_code})")
        if resp.status_code == 403:
            if resp.headers.get("X-RateLimit-Remaining") == "0":
                if waits >= _MAX_RATE_WAITS:
                    raise FetchError(
                        f"rate limit exhausted after {waits} waits; fetched {len(instances)}",
                        fetched=len(instances),
                    )
                reset = float(resp.headers.get("X-RateLimit-Reset", time.time() + 60))
                sleep(max(0.0, reset - time.time()))
                waits += 1
                continue
            raise AuthError(f"access forbidden fetching {repo} ({resp.status_code})")
        if resp.status_code != 200:
            raise FetchError(
                f"unexpected HTTP {resp.status_code} fetching {repo}; fetched {len(instances)}",
                fetched=len(instances),
            )
        batch = resp.json()
        if not batch:
            break
        for comment in batch:
            body = comment.get("body") or ""
            instances.append(
                Utterance(
                    id=str(comment["id"]),
                    raw_text=body,
                    masked_text=preprocess_text(body),
                    labels=frozenset(),
                    source={"repo": repo, "kind": "issue" if kind == "issues" else "pull_request"},
                )
            )
            if len(instances) >= limit:
                break
        page += 1
    return Dataset(instances, provenance=f"{repo}:{kind}")
