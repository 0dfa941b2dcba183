"""Proposal and embedding backends.

The stub backends are fully deterministic and dependency-free so the service
contract can be exercised without model downloads. The transformers backends
are optional and selected by giving a checkpoint name in the config.
"""

from __future__ import annotations

import hashlib
import math
import re
from typing import Protocol

MASK = "<mask>"

_STUB_VOCABULARY = [
    "great", "broken", "useful", "strange", "simple", "awful", "helpful",
    "confusing", "fast", "slow", "stable", "flaky", "clear", "messy",
    "welcome", "annoying", "neat", "odd", "solid", "fragile",
]


class ProposerBackend(Protocol):
    name: str

    def fill(self, text: str, top_k: int) -> list[tuple[str, float]]: ...


class EmbedderBackend(Protocol):
    name: str
    dim: int

    def embed(self, texts: list[str]) -> list[list[float]]: ...


class StubProposer:
    """Deterministic mask filler: ranks a fixed vocabulary by a stable hash
    of (context, word) so identical requests always return identical results."""

    name = "stub"

    def fill(self, text: str, top_k: int) -> list[tuple[str, float]]:
        def key(word: str) -> str:
            return hashlib.sha256(f"{text}\x00{word}".encode()).hexdigest()

        ranked = sorted(_STUB_VOCABULARY, key=key)
        n = len(ranked)
        return [(w, (n - i) / n) for i, w in enumerate(ranked[:top_k])]


class StubEmbedder:
    """Hashed character-trigram embedding, L2-normalized, fixed dimension."""

    name = "stub"
    dim = 64

    def embed(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            s = re.sub(r"\s+", " ", text.strip().lower())
            vec = [0.0] * self.dim
            for i in range(max(len(s) - 2, 1)):
                gram = s[i : i + 3]
                h = int(hashlib.sha256(gram.encode()).hexdigest(), 16)
                vec[h % self.dim] += 1.0
            norm = math.sqrt(sum(v * v for v in vec))
            out.append([v / norm for v in vec] if norm else vec)
        return out


class TransformersProposer:
    """Fill-mask over a Hugging Face checkpoint (requires the models extra)."""

    def __init__(self, checkpoint: str):
        from transformers import pipeline

        self.name = checkpoint
        self._pipe = pipeline("fill-mask", model=checkpoint)
        self._mask_token = self._pipe.tokenizer.mask_token

    def fill(self, text: str, top_k: int) -> list[tuple[str, float]]:
        prompt = text.replace(MASK, self._mask_token)
        results = self._pipe(prompt, top_k=top_k)
        return [(r["token_str"].strip(), float(r["score"])) for r in results]


class TransformersEmbedder:
    """Mean-pooled last hidden state, L2-normalized (requires the models extra)."""

    def __init__(self, checkpoint: str):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self.name = checkpoint
        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self._model = AutoModel.from_pretrained(checkpoint)
        self._model.eval()
        self.dim = self._model.config.hidden_size

    def embed(self, texts: list[str]) -> list[list[float]]:
        torch = self._torch
        with torch.no_grad():
            batch = self._tokenizer(texts, padding=True, truncation=True, return_tensors="pt")
            hidden = self._model(**batch).last_hidden_state
            mask = batch["attention_mask"].unsqueeze(-1)
            pooled = (hidden * mask).sum(1) / mask.sum(1).clamp(min=1)
            normed = torch.nn.functional.normalize(pooled, dim=1)
        return normed.tolist()


def build_proposer(model_id: str) -> ProposerBackend:
    if model_id == "stub":
        return StubProposer()
    return TransformersProposer(model_id)


def build_embedder(model_id: str) -> EmbedderBackend:
    if model_id == "stub":
        return StubEmbedder()
    return TransformersEmbedder(model_id)
