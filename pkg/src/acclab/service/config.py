"""Service configuration from flags and LABD_* environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from ..scheme import TEMPLATE_DIR

DEFAULT_ADDR = "127.0.0.1:8080"
DEFAULT_WORKERS = 2
DEFAULT_SESSION_TTL_H = 12.0


def split_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"address must be host:port, got {addr!r}")
    return host, int(port)


@dataclass(frozen=True)
class ServiceConfig:
    addr: str = DEFAULT_ADDR
    data_dir: Path = Path("labd-data")
    workers: int = DEFAULT_WORKERS
    session_ttl_h: float = DEFAULT_SESSION_TTL_H
    templates_dir: Path = TEMPLATE_DIR
    ui_dir: Path | None = None

    def __post_init__(self):
        split_addr(self.addr)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.session_ttl_h <= 0:
            raise ValueError("session_ttl_h must be > 0")
        if self.ui_dir is not None and not self.ui_dir.is_dir():
            raise ValueError(f"ui_dir {self.ui_dir} is not a directory")

    @property
    def host(self) -> str:
        return split_addr(self.addr)[0]

    @property
    def port(self) -> int:
        return split_addr(self.addr)[1]


def from_env(environ: dict | None = None, **overrides) -> ServiceConfig:
    """Environment-derived config; explicit keyword overrides win."""
    env = os.environ if environ is None else environ
    values = {
        "addr": env.get("LABD_ADDR", DEFAULT_ADDR),
        "data_dir": Path(env.get("LABD_DATA", "labd-data")),
        "workers": int(env.get("LABD_WORKERS", DEFAULT_WORKERS)),
        "session_ttl_h": float(env.get("LABD_SESSION_TTL_H", DEFAULT_SESSION_TTL_H)),
        "ui_dir": Path(env["LABD_UI"]) if env.get("LABD_UI") else None,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return ServiceConfig(**values)
