"""Strict INI-style experiment files.

Layout::

    [model]
    kind = gaussian            ; gaussian | multiwell | blr
    mean = 0.0
    variance = 1.0
    noise_B = 1.0

    [sampler]
    algorithm = SGMGT-D
    a = 2
    h = 0.05
    n_iters = 5000

    [output]
    directory = runs/demo

    [run]
    seeds = 1, 2, 3

Keys are case-sensitive (``A`` is the diffusion factor, ``a`` the monomial
parameter). Every key not listed below is an error. Trace sidecars written by
``format_experiment`` re-parse to the spec that produced them; their extra
``[chain]`` section is ignored on input.
"""

import configparser
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .dynamics import SamplerConfig
from .errors import ConfigError
from .kinetics import KineticSpec
from .potentials import (
    BUNDLED,
    MultiwellSpec,
    blr_potential,
    gaussian_potential,
    load_dataset,
    multiwell_potential,
    noisy_gradient,
)

MODEL_KEYS = {
    "gaussian": {"mean": "floats", "variance": "float", "noise_B": "float"},
    "multiwell": {"centers": "floats", "width": "float", "noise_B": "float"},
    "blr": {
        "dataset": "str",
        "label_column": "str",
        "test_fraction": "float",
        "split_seed": "int",
        "prior_variance": "float",
        "minibatch": "int",
    },
}
MODEL_DEFAULTS = {
    "gaussian": {"mean": (0.0,), "variance": 1.0, "noise_B": 0.0},
    "multiwell": {"centers": MultiwellSpec.centers, "width": MultiwellSpec.width, "noise_B": MultiwellSpec.noise_B},
    "blr": {"label_column": "", "test_fraction": 0.2, "split_seed": 0, "prior_variance": 1.0, "minibatch": 16},
}

SAMPLER_KEYS = {
    "algorithm": "str",
    "a": "str",
    "c": "float",
    "h": "float",
    "A": "float",
    "sigma_theta": "float",
    "sigma_p": "float",
    "sigma_xi": "float",
    "gamma": "float",
    "T_p": "period",
    "T_xi": "period",
    "integrator": "str",
    "n_iters": "int",
    "n_burnin": "int",
    "thin": "int",
    "leapfrog_steps": "int",
    "theta0": "floats",
    "record_energy": "bool",
}
SAMPLER_REQUIRED = ("algorithm", "h", "n_iters")
OUTPUT_KEYS = {"directory": "str", "prefix": "str"}
RUN_KEYS = {"seeds": "ints", "workers": "int"}
SECTIONS = ("model", "sampler", "output", "run")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def build(self):
        """Instantiate the potential this block describes."""
        p = self.params
        if self.kind == "gaussian":
            base = gaussian_potential(p["mean"], p["variance"])
            return noisy_gradient(base, p["noise_B"]) if p["noise_B"] > 0 else base
        if self.kind == "multiwell":
            return multiwell_potential(MultiwellSpec(p["centers"], p["width"], p["noise_B"]))
        return blr_potential(self.dataset(), p["prior_variance"], p["minibatch"])

    def dataset(self):
        p = self.params
        return load_dataset(p["dataset"], p["label_column"] or None, p["test_fraction"], p["split_seed"])


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "runs"
    prefix: str = "chain"


@dataclass(frozen=True)
class ExperimentSpec:
    model: ModelSpec
    sampler: SamplerConfig
    output: OutputSpec
    seeds: tuple
    workers: int = 1

    def chain_config(self, seed):
        return replace(self.sampler, seed=int(seed))


def _key_line(text, section, key):
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return i
    return None


def _convert(kind, raw, where):
    raw = raw.strip()
    try:
        if kind == "str":
            return raw
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "floats":
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if kind == "ints":
            return tuple(int(v) for v in raw.replace(",", " ").split())
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "period":
            return None if raw.lower() in ("off", "none", "disabled", "0") else int(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind}") from None
    raise AssertionError(kind)


def _read_section(cp, text, source, section, allowed):
    out = {}
    if not cp.has_section(section):
        return out
    for key, raw in cp.items(section):
        line = _key_line(text, section, key)
        where = f"{source}:{line} [{section}] {key}" if line else f"{source} [{section}] {key}"
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")
        out[key] = _convert(allowed[key], raw, where)
    return out


def parse_experiment_text(text, source="<string>"):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(source))
    except configparser.Error as err:
        raise ConfigError(f"{source}: {err}") from None
    for sec in cp.sections():
        if sec not in SECTIONS and sec != "chain":
            raise ConfigError(f"{source}:{_key_line(text, sec, '') or '?'}: unknown section [{sec}]")

    # model block
    if not cp.has_section("model") or "kind" not in cp["model"]:
        raise ConfigError(f"{source}: [model] kind is required")
    kind = cp["model"]["kind"].strip()
    if kind not in MODEL_KEYS:
        raise ConfigError(f"{source}: unknown model kind {kind!r}; expected one of {sorted(MODEL_KEYS)}")
    allowed = dict(MODEL_KEYS[kind], kind="str")
    params = dict(MODEL_DEFAULTS[kind])
    params.update(_read_section(cp, text, source, "model", allowed))
    params.pop("kind")
    if kind == "blr":
        ds = params.get("dataset")
        if not ds:
            raise ConfigError(f"{source}: blr model requires [model] dataset")
        if ds not in BUNDLED and not Path(ds).is_file():
            raise ConfigError(f"{source}: dataset {ds!r} does not exist")
        if not params["label_column"] and ds not in BUNDLED:
            raise ConfigError(f"{source}: [model] label_column is required for CSV datasets")

    # sampler block
    s = _read_section(cp, text, source, "sampler", SAMPLER_KEYS)
    missing = [k for k in SAMPLER_REQUIRED if k not in s]
    if missing:
        raise ConfigError(f"{source}: [sampler] missing required key(s) {missing}")
    run = _read_section(cp, text, source, "run", RUN_KEYS)
    seeds = run.get("seeds", ())
    if not seeds:
        raise ConfigError(f"{source}: [run] seeds must list at least one seed")
    try:
        kinetic = KineticSpec(s.pop("a", "1"), s.pop("c", 5.0))
        sampler = SamplerConfig(kinetic=kinetic, seed=seeds[0], **s).validate()
    except ValueError as err:
        raise ConfigError(f"{source}: {err}") from None

    output = OutputSpec(**_read_section(cp, text, source, "output", OUTPUT_KEYS))
    workers = run.get("workers", 1)
    if workers < 1:
        raise ConfigError(f"{source}: [run] workers must be positive")
    spec = ExperimentSpec(ModelSpec(kind, params), sampler, output, tuple(seeds), workers)
    if spec.sampler.theta0 is not None:
        dim = len(params["mean"]) if kind == "gaussian" else 1 if kind == "multiwell" else None
        if dim is not None and len(spec.sampler.theta0) not in (1, dim):
            raise ConfigError(f"{source}: theta0 has {len(spec.sampler.theta0)} entries, model has {dim}")
    return spec


def parse_experiment(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None
    return parse_experiment_text(text, path)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def format_experiment(spec, chain=None):
    """Render the effective spec (all defaults filled) as an experiment file.

    ``chain`` adds a trailing ``[chain]`` section of run metadata.
    """
    lines = ["[model]", f"kind = {spec.model.kind}"]
    for k in MODEL_KEYS[spec.model.kind]:
        if k in spec.model.params:
            lines.append(f"{k} = {_fmt(spec.model.params[k])}")
    lines += ["", "[sampler]"]
    s = spec.sampler
    for f in fields(SamplerConfig):
        if f.name in ("seed", "kinetic"):
            continue
        v = getattr(s, f.name)
        if f.name in ("T_p", "T_xi") and v is None:
            v = "off"
        if v is None:
            continue
        lines.append(f"{f.name} = {_fmt(v)}")
    lines.insert(lines.index("[sampler]") + 2, f"a = {s.kinetic.label()}")
    lines.insert(lines.index("[sampler]") + 3, f"c = {_fmt(s.kinetic.c)}")
    lines += ["", "[output]", f"directory = {spec.output.directory}", f"prefix = {spec.output.prefix}"]
    lines += ["", "[run]", f"seeds = {_fmt(spec.seeds)}", f"workers = {spec.workers}"]
    if chain:
        lines += ["", "[chain]"] + [f"{k} = {_fmt(v)}" for k, v in chain.items()]
    return "\n".join(lines) + "\n"
