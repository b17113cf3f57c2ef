"""Plain-text key=value run configuration."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..errors import ConfigError


@dataclass
class RunConfig:
    k: int | None = None
    K: int | None = None
    f: int = 4
    tau: int | None = None
    gamma_degConstr: int | None = None
    gamma_vs: float = 2.0
    gamma_es: float = 2.0
    base_threshold: int | None = None
    stall_window: int = 64
    bst: bool = True
    verify: bool = False
    verify_every: int | None = None
    seed: int = 0
    generator: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)

    def overrides(self) -> dict:
        """Keyword overrides for the parameter schedule."""
        out: dict = {"f": self.f, "gamma_vs": self.gamma_vs, "gamma_es": self.gamma_es, "stall_window": self.stall_window}
        if self.k is not None:
            out["k"] = self.k
        if self.K is not None:
            out["K"] = self.K
        if self.tau is not None:
            out["tau"] = self.tau
        if self.gamma_degConstr is not None:
            out["gamma_dc"] = self.gamma_degConstr
        if self.base_threshold is not None:
            out["base_threshold"] = self.base_threshold
        return out


_BOOL = {"on": True, "off": False, "true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _convert(name, typ, raw: str):
    raw = raw.strip()
    typ = str(typ)
    if raw.lower() in ("none", "") and "None" in typ:
        return None
    try:
        if typ.startswith("bool"):
            return _BOOL[raw.lower()]
        if typ.startswith("int"):
            return int(raw)
        if typ.startswith("float"):
            return float(raw)
    except (KeyError, ValueError):
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse key=value lines; '#' starts a comment.  Unknown keys are rejected."""
    types = {f.name: f.type for f in fields(RunConfig)}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, types[key], raw)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        return parse_config(fh.read())
