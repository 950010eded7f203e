"""Command-line experiments driven by an INI configuration file.

Usage::

    ssfkit SUBCOMMAND --config run.ini [--out DIR] [--set section.key=value ...] [--threads N]

Subcommands: phase, spectrum, ssf, weak, cesaro, floor-lemma, trace-check.

Configuration schema (every key optional unless noted; unknown keys are
rejected)::

    [potential]
    # one segment per line: KIND START END key=value ...
    #   constant     value=
    #   exponential  amplitude= rate=        (V = amplitude * exp(-rate x))
    #   sech2        amplitude= scale=       (V = amplitude / cosh(x / scale)**2)
    #   power        coeff= alpha= side=left|right
    #   tabulated    xs=x0;x1;... values=v0;v1;...   (linear interpolation)
    # END may be "inf". No segments means V = 0.
    segments =
        constant 0 1 value=-4

    [experiment]
    k_min, k_max, k_points      phase grid (geometric)
    r                           box length(s) for ssf / trace-check, comma list
    lambda_max, lambda_points   ssf energy grid
    r_list                      weak convergence box lengths
    g                           hat A B [PEAK] | bump CENTER WIDTH | spline K0,K1,..;V0,V1,..
    lambdas, R_list, dr         Cesaro energies, averaging lengths, max r-step
    probe                       exp LIMIT C RATE | damped_sine LIMIT C OMEGA | step B0,B1,..;V0,..;LIMIT
    floor_R                     floor-average lengths
    lemma_g, lemma_r            lemma test function and sequence r_n
    f                           heat T | resolvent RE IM | spline K0,..;V0,..
    n_list                      finite-difference grid sizes

    [numerics]
    tol, phase_tol, halfline_tol (all > 0)

    [output]
    directory

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

import argparse
import configparser
import hashlib
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, _csvio, limits, phase, ssf, trace_check
from . import potentials as pot
from .counting import negative_eigenvalues_halfline
from .errors import InadmissiblePotentialError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

SCHEMA = {
    "potential": {"segments": ""},
    "experiment": {
        "k_min": "0.05",
        "k_max": "10",
        "k_points": "200",
        "r": "10",
        "lambda_max": "10",
        "lambda_points": "2000",
        "r_list": "10, 20, 40, 80",
        "g": "hat 0.5 2.5",
        "lambdas": "0.5, 1, 2",
        "R_list": "50, 100, 200, 500",
        "dr": "inf",
        "probe": "exp 0.3 1 1",
        "floor_R": "10, 100, 1000",
        "lemma_g": "hat 0.1 0.9 0.4",
        "lemma_r": "10, 20, 40, 80, 160, 320, 640",
        "f": "heat 1",
        "n_list": "1000, 2000, 4000",
    },
    "numerics": {"tol": "1e-10", "phase_tol": "1e-8", "halfline_tol": "1e-8"},
    "output": {"directory": "out"},
}

SEGMENT_KEYS = {
    "constant": ("value",),
    "exponential": ("amplitude", "rate"),
    "sech2": ("amplitude", "scale"),
    "power": ("coeff", "alpha", "side"),
    "tabulated": ("xs", "values"),
}


class ConfigError(Exception):
    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")


# -- configuration -------------------------------------------------------------


class RunConfig:
    """Parsed configuration with the source line of every key."""

    def __init__(self, path=None, overrides=()):
        self.path = path
        self.text_lines = []
        self.values = {s: dict(keys) for s, keys in SCHEMA.items()}
        self.where = {}
        if path is not None:
            self._read(path)
        for item in overrides:
            self._override(item)
        self._validate()

    def _read(self, path):
        text = Path(path).read_text()
        self.text_lines = text.splitlines()
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            line = getattr(exc, "lineno", None)
            raise ConfigError(f"{path}:{line or '?'}", str(exc).splitlines()[0]) from None
        lines = _key_lines(text)
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"{path}:{lines.get((section, None), '?')}", f"unknown section [{section}]")
            for key, value in parser.items(section):
                where = f"{path}:{lines.get((section, key), '?')}"
                if key not in SCHEMA[section]:
                    raise ConfigError(where, f"unknown key {key!r} in [{section}]")
                self.values[section][key] = value
                self.where[(section, key)] = where

    def _override(self, item):
        where = f"--set {item}"
        m = re.fullmatch(r"(\w+)\.(\w+)=(.*)", item, flags=re.S)
        if not m:
            raise ConfigError(where, "expected section.key=value")
        section, key, value = m.groups()
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(where, f"unknown key {section}.{key}")
        self.values[section][key] = value
        self.where[(section, key)] = where

    def locate(self, section, key):
        return self.where.get((section, key), f"[{section}] {key} (default)")

    def _validate(self):
        for key in SCHEMA["numerics"]:
            if not self.number("numerics", key) > 0:
                raise ConfigError(self.locate("numerics", key), f"{key} must be > 0")
        for key in ("r_list", "R_list", "floor_R", "lemma_r"):
            vals = self.numbers("experiment", key)
            if not vals or any(v <= 0 for v in vals) or any(np.diff(vals) <= 0):
                raise ConfigError(self.locate("experiment", key), f"{key} must be positive and increasing")
        self.potential = self._potential()

    def raw(self, section, key):
        return self.values[section][key].strip()

    def number(self, section, key):
        try:
            return float(self.raw(section, key))
        except ValueError:
            raise ConfigError(self.locate(section, key), f"{key} must be a number") from None

    def integer(self, section, key):
        v = self.number(section, key)
        if v != int(v) or v < 1:
            raise ConfigError(self.locate(section, key), f"{key} must be a positive integer")
        return int(v)

    def numbers(self, section, key):
        try:
            return [float(t) for t in re.split(r"[,\s]+", self.raw(section, key)) if t]
        except ValueError:
            raise ConfigError(self.locate(section, key), f"{key} must be a list of numbers") from None

    def _potential(self):
        where = self.locate("potential", "segments")
        segments = []
        for line, here in self._segment_lines(where):
            segments.append(_parse_segment(line, here))
        try:
            return pot.PotentialSpec(tuple(sorted(segments, key=lambda s: s.start)))
        except InadmissiblePotentialError as exc:
            raise ConfigError(where, str(exc)) from None

    def _segment_lines(self, where):
        """Non-empty segment lines, each paired with its source location."""
        lines = [ln.strip() for ln in self.values["potential"]["segments"].splitlines()]
        lines = [ln for ln in lines if ln]
        m = re.fullmatch(r"(.*):(\d+)", where)
        if not m:
            return [(ln, where) for ln in lines]
        src, i = m.group(1), int(m.group(2)) - 1
        out = []
        for ln in lines:
            # walk forward from the key line to the source line holding this segment
            while i < len(self.text_lines) and ln not in self.text_lines[i]:
                i += 1
            out.append((ln, f"{src}:{i + 1}"))
        return out

    def echo(self):
        return {s: {k: v.strip() for k, v in keys.items()} for s, keys in self.values.items()}


def _key_lines(text):
    """(section, key) -> 1-based line number; (section, None) for headers."""
    out, section = {}, None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            out[(section, None)] = i
            continue
        m = re.match(r"(\w+)\s*[=:]", line)
        if m and section is not None:
            out[(section, m.group(1))] = i
    return out


def _floats(text, where, name):
    try:
        return [float(t) for t in re.split(r"[;,]", text) if t.strip()]
    except ValueError:
        raise ConfigError(where, f"{name} must be numbers") from None


def _parse_segment(line, where):
    tokens = line.split()
    if len(tokens) < 3:
        raise ConfigError(where, "segment needs KIND START END key=value ...")
    kind, start, end, *rest = tokens
    if kind not in SEGMENT_KEYS:
        raise ConfigError(where, f"unknown segment kind {kind!r}")
    try:
        start, end = float(start), float(end)
    except ValueError:
        raise ConfigError(where, "segment START and END must be numbers") from None
    kw = {}
    for tok in rest:
        key, eq, value = tok.partition("=")
        if not eq or key not in SEGMENT_KEYS[kind]:
            raise ConfigError(where, f"unexpected {tok!r} for a {kind} segment")
        kw[key] = value
    missing = [k for k in SEGMENT_KEYS[kind] if k not in kw and k != "side"]
    if missing:
        raise ConfigError(where, f"{kind} segment is missing {', '.join(missing)}")
    try:
        if kind == "tabulated":
            xs = _floats(kw["xs"], where, "xs")
            vs = _floats(kw["values"], where, "values")
            if xs and (xs[0] != start or xs[-1] != end):
                raise ConfigError(where, "tabulated xs must run from START to END")
            return pot.Segment(kind, start, end, (tuple(xs), tuple(vs)))
        if kind == "power":
            side = kw.get("side", "left")
            if side not in ("left", "right"):
                raise ConfigError(where, "side must be left or right")
            anchor = start if side == "left" else end
            return pot.Segment(kind, start, end, (float(kw["coeff"]), float(kw["alpha"]), anchor))
        return pot.Segment(kind, start, end, tuple(float(kw[k]) for k in SEGMENT_KEYS[kind]))
    except InadmissiblePotentialError as exc:
        raise ConfigError(where, str(exc)) from None
    except ValueError:
        raise ConfigError(where, "segment parameters must be numbers") from None


def _test_function(text, where):
    kind, _, rest = text.strip().partition(" ")
    try:
        if kind == "hat":
            return limits.TestFunction.hat(*[float(t) for t in rest.split()])
        if kind == "bump":
            return limits.TestFunction.bump(*[float(t) for t in rest.split()])
        if kind == "spline":
            knots, values = rest.split(";", 1)
            return limits.TestFunction.spline(_floats(knots, where, "knots"), _floats(values, where, "values"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"bad test function {text!r}: {exc}") from None
    raise ConfigError(where, f"unknown test function kind {kind!r}")


def _probe(text, where):
    kind, _, rest = text.strip().partition(" ")
    try:
        if kind in ("exp", "damped_sine"):
            return getattr(limits.ProbeFunction, kind)(*[float(t) for t in rest.split()])
        if kind == "step":
            breaks, values, limit = rest.split(";")
            return limits.ProbeFunction.step(
                _floats(breaks, where, "breaks"), _floats(values, where, "values"), float(limit)
            )
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"bad probe {text!r}: {exc}") from None
    raise ConfigError(where, f"unknown probe kind {kind!r}")


def _trace_function(text, where):
    kind, _, rest = text.strip().partition(" ")
    try:
        if kind == "heat":
            return trace_check.TraceFunction.heat(float(rest))
        if kind == "resolvent":
            re_, im = (float(t) for t in rest.split())
            return trace_check.TraceFunction.resolvent(complex(re_, im))
        if kind == "spline":
            knots, values = rest.split(";", 1)
            return trace_check.TraceFunction.spline(_floats(knots, where, "knots"), _floats(values, where, "values"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"bad f {text!r}: {exc}") from None
    raise ConfigError(where, f"unknown f kind {kind!r}")


# -- execution helpers ---------------------------------------------------------


def _map(fn, items, threads):
    """Ordered map, in worker processes when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(len(items) // (4 * threads), 1)))


def _tag(x):
    return repr(float(x)).replace("-", "m").replace(".", "p")


class Run:
    def __init__(self, cfg, out_dir, threads):
        self.cfg = cfg
        self.V = cfg.potential
        self.out = Path(out_dir)
        self.threads = threads
        self.outputs = {}
        self.summary = {}
        self.out.mkdir(parents=True, exist_ok=True)

    def meta(self, **extra):
        m = {"potential": self.V.digest, "version": __version__}
        m.update(extra)
        return m

    def write(self, name, text):
        path = self.out / name
        path.write_text(text)
        self.outputs[name] = hashlib.sha256(text.encode()).hexdigest()

    @property
    def tol(self):
        return self.cfg.number("numerics", "tol")

    def exp_numbers(self, key):
        return self.cfg.numbers("experiment", key)

    # -- subcommands ---------------------------------------------------------

    def phase(self):
        c = self.cfg
        ks = np.geomspace(c.number("experiment", "k_min"), c.number("experiment", "k_max"),
                          c.integer("experiment", "k_points"))
        curve = phase.phase_curve(self.V, ks, tol=self.tol)
        self.write("phase_curve.csv", curve.to_csv(None, self.meta(tol=self.tol)))

    def spectrum(self):
        htol = self.cfg.number("numerics", "halfline_tol")
        eig = negative_eigenvalues_halfline(self.V, htol)
        res = phase.detect_resonance(self.V)
        try:
            lev = phase.levinson_count(self.V)
            lev_text = lev.bound_states
            if lev.resonant:
                lev_text = f"{lev.bound_states} (half-integer: resonant)"
        except NumericalError as exc:
            lev_text = f"inconclusive: {exc}"
        self.summary = {
            "bound_states": len(eig),
            "eigenvalues": eig,
            "bargmann_bound": pot.negative_part_moment(self.V),
            "levinson_count": lev_text,
            "resonance": "Resonant" if res.resonant else "NonResonant",
            "jost_zero_modulus": res.witness,
        }
        rows = list(enumerate(eig, 1))
        text = _csvio.write_table(None, ("index", "eigenvalue"), rows, self.meta(tol=htol))
        self.write("spectrum.csv", text)
        self.write("spectrum.json", json.dumps(self.summary, indent=2, sort_keys=True) + "\n")

    def ssf(self):
        c = self.cfg
        grid = ssf.default_energy_grid(self.V, c.number("experiment", "lambda_max"),
                                       c.integer("experiment", "lambda_points"))
        ptol = c.number("numerics", "phase_tol")
        vals = _map(partial(_ssf_halfline_point, self.V, ptol), grid, self.threads)
        half = ssf.SsfProfile(grid, np.array(vals), None)
        self.write("ssf_halfline.csv", half.to_csv(None, self.meta(tol=ptol)))
        for r in self.exp_numbers("r"):
            prof = ssf.ssf_box_profile(self.V, r, grid, self.tol)
            self.write(f"ssf_box_r{_tag(r)}.csv", prof.to_csv(None, self.meta(tol=self.tol)))

    def weak(self):
        g = _test_function(self.cfg.raw("experiment", "g"), self.cfg.locate("experiment", "g"))
        rep = limits.weak_convergence_study(self.V, g, self.exp_numbers("r_list"), self.tol)
        self.write("weak.csv", rep.to_csv(None, "r"))

    def cesaro(self):
        dr = self.cfg.number("experiment", "dr")
        for lam in self.exp_numbers("lambdas"):
            rep = limits.cesaro_study(self.V, lam, self.exp_numbers("R_list"), dr, self.tol)
            self.write(f"cesaro_lambda{_tag(lam)}.csv", rep.to_csv(None, "R"))

    def floor_lemma(self):
        c = self.cfg
        h = _probe(c.raw("experiment", "probe"), c.locate("experiment", "probe"))
        Rs = self.exp_numbers("floor_R")
        obs = [limits.floor_average(h, R) for R in Rs]
        rep = limits.ConvergenceReport(Rs, obs, [h.limit + h.offset] * len(Rs),
                                       {"probe": c.raw("experiment", "probe")})
        self.write("floor_average.csv", rep.to_csv(None, "R"))
        g = _test_function(c.raw("experiment", "lemma_g"), c.locate("experiment", "lemma_g"))
        for fam in limits.standard_lemma_families():
            rep = limits.lemma_sequence_check(fam, g, self.exp_numbers("lemma_r"))
            self.write(f"lemma_{fam.name}.csv", rep.to_csv(None, "r"))

    def trace_check(self):
        c = self.cfg
        f = _trace_function(c.raw("experiment", "f"), c.locate("experiment", "f"))
        ns = [int(n) for n in self.exp_numbers("n_list")]
        for r in self.exp_numbers("r"):
            rows = trace_check.residual_table(self.V, r, ns, f, self.tol)
            text = _csvio.write_table(None, ("n", "lhs", "rhs", "residual"), rows,
                                             self.meta(r=r, f=c.raw("experiment", "f")))
            self.write(f"trace_residual_r{_tag(r)}.csv", text)

    def manifest(self, subcommand):
        data = {
            "subcommand": subcommand,
            "version": __version__,
            "config": self.cfg.echo(),
            "tolerances": {k: self.cfg.number("numerics", k) for k in SCHEMA["numerics"]},
            "potential_digest": self.V.digest,
            "outputs": dict(sorted(self.outputs.items())),
        }
        (self.out / "manifest.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _ssf_halfline_point(V, tol, lam):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ssf.ResonanceWarning)
        return ssf.ssf_halfline(V, float(lam), tol)


SUBCOMMANDS = {
    "phase": Run.phase,
    "spectrum": Run.spectrum,
    "ssf": Run.ssf,
    "weak": Run.weak,
    "cesaro": Run.cesaro,
    "floor-lemma": Run.floor_lemma,
    "trace-check": Run.trace_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="ssfkit", description=__doc__.split("\n\n")[0])
    p.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    p.add_argument("--config", metavar="PATH", help="INI configuration file")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides [output] directory)")
    p.add_argument("--set", metavar="SECTION.KEY=VALUE", action="append", default=[],
                   dest="overrides", help="override one configuration value (repeatable)")
    p.add_argument("--threads", metavar="N", type=int, default=1, help="worker processes")
    return p


def run(subcommand, config_path=None, overrides=(), out=None, threads=1, stdout=None):
    """Run one subcommand; returns the process exit code."""
    stdout = stdout or sys.stdout
    try:
        if config_path is not None and not Path(config_path).is_file():
            raise ConfigError(config_path, "no such file")
        if threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        cfg = RunConfig(config_path, overrides)
        job = Run(cfg, out or cfg.raw("output", "directory"), threads)
        SUBCOMMANDS[subcommand](job)
        job.manifest(subcommand)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if job.summary:
        for key, value in job.summary.items():
            print(f"{key}: {value}", file=stdout)
    print(f"wrote {len(job.outputs)} file(s) to {job.out}", file=stdout)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args.config, args.overrides, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
