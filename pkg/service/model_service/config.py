from dataclasses import dataclass


@dataclass
class ServiceConfig:
    """Runtime settings; models are loaded once at startup.

    The backend identifiers "stub" select the dependency-free deterministic
    backends. Anything else is treated as a transformers checkpoint name and
    requires the `models` extra.
    """

    host: str = "127.0.0.1"
    port: int = 8601
    proposer_model: str = "stub"
    embedder_model: str = "stub"
    top_k_cap: int = 50
    batch_cap: int = 64
    timeout: float = 30.0
