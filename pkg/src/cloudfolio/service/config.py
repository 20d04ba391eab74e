"""Service configuration, sourced from the environment or a JSON file."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

__all__ = ["ServiceConfig", "ENV_PREFIX"]

ENV_PREFIX = "CLOUDFOLIO_"


@dataclass(frozen=True)
class ServiceConfig:
    """Knobs the service reads once at startup.

    ``horizon`` and ``reserved_term`` left as None mean: derive the horizon
    from each portfolio's latest finish, and let the reserved term equal
    the horizon.
    """

    data_dir: Path = Path("cloudfolio_data")
    host: str = "127.0.0.1"
    port: int = 8000
    workers: int = 2
    horizon: int | None = None
    reserved_term: int | None = None
    token_lifetime_s: int = 24 * 3600
    static_dir: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "data_dir", Path(self.data_dir))
        if self.static_dir is not None:
            object.__setattr__(self, "static_dir", Path(self.static_dir))
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.port < 1 or self.port > 65535:
            raise ValueError(f"port must be in [1, 65535], got {self.port}")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.reserved_term is not None and self.reserved_term < 1:
            raise ValueError(f"reserved_term must be >= 1, got {self.reserved_term}")
        if self.token_lifetime_s < 1:
            raise ValueError(f"token_lifetime_s must be >= 1, got {self.token_lifetime_s}")

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "ServiceConfig":
        env = os.environ if env is None else env

        def pick(name: str, cast, default):
            raw = env.get(ENV_PREFIX + name)
            return default if raw is None or raw == "" else cast(raw)

        return cls(
            data_dir=pick("DATA_DIR", Path, cls.data_dir),
            host=pick("HOST", str, cls.host),
            port=pick("PORT", int, cls.port),
            workers=pick("WORKERS", int, cls.workers),
            horizon=pick("HORIZON", int, None),
            reserved_term=pick("RESERVED_TERM", int, None),
            token_lifetime_s=pick("TOKEN_LIFETIME_S", int, cls.token_lifetime_s),
            static_dir=pick("STATIC_DIR", Path, None),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        try:
            body = json.loads(path.read_text())
        except OSError as exc:
            raise OSError(f"cannot read service config from {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(body) - known
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**body)
