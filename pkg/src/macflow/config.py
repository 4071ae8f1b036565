"""Run configuration files.

A config is an INI-style file with flat sections::

    [model]
    m1 = 2
    m2 = 1
    epsilon = 0.01
    kappa = 5          ; optional, default 3*m2 + 1
    symbol = fd        ; optional, fd | spectral

    [grid]
    nx = 128
    ny = 128

    [time]
    order = 3
    tau = 0.1
    T = 20

    [ic]
    kind = random_vector
    seed = 0
    K = 8
    metric = torus

    [rescale]
    mode = exact
    samples = 65

    [output]
    dir = out
    snapshot_times = 0, 50, 100
    series_stride = 1

Unknown sections or keys are rejected.
"""
import configparser

from .harness import RunConfig
from .matfield import ModelParams, PreconditionError
from .scenarios import DEFAULT_GRAINS, ScenarioSpec


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "model": {"m1": int, "m2": int, "epsilon": float, "kappa": float, "symbol": str},
    "grid": {"nx": int, "ny": int},
    "time": {"order": int, "tau": float, "t": float},
    "ic": {"kind": str, "seed": int, "k": int, "metric": str},
    "rescale": {"mode": str, "samples": int},
    "output": {"dir": str, "snapshot_times": str, "series_stride": int},
}
_REQUIRED = {"model": ("m1", "m2", "epsilon"), "time": ("order", "tau", "t"), "ic": ("kind",)}


def _read(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cp


def parse_config(path, seed=None, output_dir=None):
    """Read and validate ``path`` into a :class:`RunConfig`.

    ``seed`` and ``output_dir`` override the file's values when given.
    """
    cp = _read(path)
    raw = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        raw[section] = {}
        for key, value in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key '{key}' in [{section}]")
            conv = _SCHEMA[section][key]
            try:
                raw[section][key] = conv(value)
            except ValueError:
                raise ConfigError(
                    f"{path}: [{section}] {key} = {value!r} is not a valid {conv.__name__}") from None
    for section, keys in _REQUIRED.items():
        for key in keys:
            if key not in raw.get(section, {}):
                raise ConfigError(f"{path}: missing required key '{key}' in [{section}]")

    model, grid, tm = raw["model"], raw.get("grid", {}), raw["time"]
    ic, rs, out = raw["ic"], raw.get("rescale", {}), raw.get("output", {})
    nx = grid.get("nx", 128)
    ny = grid.get("ny", nx)
    snaps = ()
    if out.get("snapshot_times", "").strip():
        try:
            snaps = tuple(float(s) for s in out["snapshot_times"].split(","))
        except ValueError:
            raise ConfigError(f"{path}: [output] snapshot_times must be a comma list of numbers") from None

    def build(what, fn):
        try:
            return fn()
        except PreconditionError as exc:
            raise ConfigError(f"{path}: invalid {what}: {exc}") from None

    params = build("[model]", lambda: ModelParams(
        m1=model["m1"], m2=model["m2"], epsilon=model["epsilon"], kappa=model.get("kappa")))
    scenario = build("[ic]", lambda: ScenarioSpec(
        kind=ic["kind"], m1=params.m1, m2=params.m2, nx=nx, ny=ny,
        seed=ic.get("seed", 0) if seed is None else seed, K=ic.get("k", DEFAULT_GRAINS),
        metric=ic.get("metric", "torus")))
    symbol = model.get("symbol", "fd")
    if symbol not in ("fd", "spectral"):
        raise ConfigError(f"{path}: [model] symbol must be fd or spectral, got {symbol!r}")
    for key, val in (("nx", nx), ("ny", ny)):
        if val < 4 or val % 2:
            raise ConfigError(f"{path}: [grid] {key} must be even and >= 4, got {val}")
    if not 1 <= tm["order"] <= 5:
        raise ConfigError(f"{path}: [time] order must be in 1..5, got {tm['order']}")
    return build("[time]/[output]", lambda: RunConfig(
        params=params, nx=nx, ny=ny, order=tm["order"], tau=tm["tau"], T=tm["t"],
        scenario=scenario, snapshot_times=snaps, rescale_mode=rs.get("mode", "exact"),
        samples=rs.get("samples", 65), symbol=symbol,
        output_dir=output_dir if output_dir is not None else out.get("dir"),
        series_stride=out.get("series_stride", 1)))
