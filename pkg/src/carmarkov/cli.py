"""Scenario runner: each scenario checks one family of properties and writes a report.

Usage::

    carmarkov --scenario counterexample --lambda 1 --seed 7 --out report.json

Exit codes: 0 when every assertion passes, 1 when one fails, 2 for a bad config.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .car import MAX_MODES, Region, build_fock, regional_subalgebra
from .entropy import entropy_hat, entropy_vn, relative_entropy, ssa_residual
from .errors import BothMarginalsNoneven, ConfigError, NotNested, TripleNotCommutingSquare
from .markov import block_markov_state, counterexample, markov_report
from .separability import (
    certify,
    hopping_witness,
    jw_twist_image,
    product_check,
    tau_norm,
    verify_decomposition,
)
from .states import (
    StateDensity,
    Triple,
    commuting_square_check,
    product_extension,
    random_state,
    regional_triple,
    restrict,
    twisted_triple,
)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# -- report encoding ------------------------------------------------------------

def _number(x):
    """JSON-safe scalar: bools and ints as is, non-finite floats as strings."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else str(x)


def matrix_to_json(m: np.ndarray) -> dict:
    """Row-major ``[[re, im], ...]`` with the declared dimension."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    return {"dim": int(m.shape[0]),
            "data": [[float(z.real), float(z.imag)] for z in m.ravel()]}


def matrix_from_json(doc: dict) -> np.ndarray:
    dim = int(doc["dim"])
    data = np.asarray(doc["data"], dtype=float)
    if data.shape != (dim * dim, 2):
        raise ValueError(f"matrix data of shape {data.shape} does not match dim {dim}")
    return (data[:, 0] + 1j * data[:, 1]).reshape(dim, dim)


def density_to_json(phi: StateDensity) -> dict:
    return {"n_modes": phi.rep.n_modes, **matrix_to_json(phi.rho)}


def density_from_json(doc: dict) -> StateDensity:
    return StateDensity(build_fock(int(doc["n_modes"])), matrix_from_json(doc))


@dataclass
class Assertion:
    name: str
    value: float
    threshold: float
    passed: bool

    @classmethod
    def at_most(cls, name, value, threshold) -> "Assertion":
        return cls(name, value, threshold, bool(value <= threshold))

    @classmethod
    def at_least(cls, name, value, threshold) -> "Assertion":
        return cls(name, value, threshold, bool(value >= threshold))

    @classmethod
    def holds(cls, name, ok: bool) -> "Assertion":
        return cls(name, int(bool(ok)), 1, bool(ok))

    def as_dict(self) -> dict:
        return {"name": self.name, "value": _number(self.value),
                "threshold": _number(self.threshold), "pass": self.passed}


@dataclass
class ScenarioResult:
    assertions: list[Assertion] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)


def emit_report(config: "ScenarioConfig", result: ScenarioResult | None,
                error: str | None = None) -> dict:
    doc = {
        "scenario": config.scenario,
        "config": config.as_dict(),
        "version": __version__,
        "assertions": [] if result is None else [a.as_dict() for a in result.assertions],
    }
    if result is not None and result.diagnostics:
        doc["diagnostics"] = {k: _number(v) if not isinstance(v, (str, list, dict)) else v
                              for k, v in result.diagnostics.items()}
    if result is not None and result.matrices:
        doc["matrices"] = {k: matrix_to_json(v) for k, v in result.matrices.items()}
    if error is not None:
        doc["error"] = error
    return doc


def render_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "name", "value", "threshold", "pass"])
    for a in doc["assertions"]:
        writer.writerow([doc["scenario"], a["name"], a["value"], a["threshold"], a["pass"]])
    if "error" in doc:
        writer.writerow([doc["scenario"], "error", doc["error"], "", False])
    return buf.getvalue()


def write_report(doc: dict, out: str | None, stream=None) -> None:
    text = render_csv(doc) if out and out.endswith(".csv") else json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        (stream or sys.stdout).write(text)


# -- configuration --------------------------------------------------------------

SCENARIOS: dict[str, dict] = {
    "ssa-sweep": {"modes": (1, 1, 1), "trials": 500, "tol": {"ssa": 1e-9}},
    "commuting-square": {"modes": (1, 1, 1), "trials": 1, "tol": {"square": 1e-10}},
    "markov-equivalence": {"modes": (1, 1, 1), "trials": 200,
                           "tol": {"markov": 1e-8, "fixed_point": 1e-8, "t_sharp": 1e-9}},
    "counterexample": {"modes": (1, 3, 1), "trials": 100,
                       "tol": {"markov": 1e-8, "marginal": 1e-10, "witness": 1e-10,
                               "ppt": 1e-10, "reconstruction": 1e-10, "lemma": 1e-9}},
    "additivity-product": {"modes": (1, 1), "trials": 200,
                           "tol": {"additivity": 1e-8, "even": 1e-6, "equations": 1e-6}},
    "entropy-identities": {"modes": (1, 1, 1), "trials": 100,
                           "tol": {"offset": 1e-9, "entropy_drop": 1e-9,
                                   "local_entropy": 1e-9, "monotonicity": 1e-9}},
}


@dataclass
class ScenarioConfig:
    scenario: str
    modes: tuple[int, ...]
    lam: float
    seed: int
    trials: int
    tol: dict[str, float]
    out: str | None = None

    @classmethod
    def build(cls, scenario: str, modes=None, lam: float = 1.0, seed: int = 0,
              trials: int | None = None, tol: dict | None = None,
              out: str | None = None) -> "ScenarioConfig":
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}")
        defaults = SCENARIOS[scenario]
        tolerances = dict(defaults["tol"])
        for key, value in (tol or {}).items():
            if key not in tolerances:
                raise ConfigError(f"unknown tolerance {key!r} for {scenario}; "
                                  f"have {sorted(tolerances)}")
            tolerances[key] = float(value)
        cfg = cls(scenario, tuple(modes) if modes else defaults["modes"], float(lam), int(seed),
                  defaults["trials"] if trials is None else int(trials), tolerances, out)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        expected = len(SCENARIOS[self.scenario]["modes"])
        if len(self.modes) != expected:
            raise ConfigError(f"{self.scenario} needs {expected} region sizes, got {self.modes}")
        if any(m < 1 for m in self.modes):
            raise ConfigError(f"region sizes must be >= 1, got {self.modes}")
        if sum(self.modes) > MAX_MODES:
            raise ConfigError(f"at most {MAX_MODES} modes in total, got {sum(self.modes)}")
        if not (0.0 < self.lam <= 1.0):
            raise ConfigError(f"lambda must lie in (0, 1], got {self.lam}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if any(not (t > 0) for t in self.tol.values()):
            raise ConfigError("tolerances must be positive")
        if self.scenario == "counterexample" and (self.modes[0] != 1 or self.modes[2] != 1
                                                  or self.modes[1] < 3):
            raise ConfigError("counterexample needs sizes 1,n_B,1 with n_B >= 3")

    def regions(self) -> list[Region]:
        out, start = [], 1
        for m in self.modes:
            out.append(Region(range(start, start + m)))
            start += m
        return out

    def as_dict(self) -> dict:
        return {"scenario": self.scenario, "modes": list(self.modes), "lambda": self.lam,
                "seed": self.seed, "trials": self.trials,
                "tol": {k: self.tol[k] for k in sorted(self.tol)}}


# -- scenarios ------------------------------------------------------------------

_SWEEP_KINDS = ("general", "even", "gauge_invariant")


def _seeds(cfg: ScenarioConfig) -> np.ndarray:
    return np.random.default_rng(cfg.seed).integers(0, 2**31, size=cfg.trials)


def _scenario_ssa_sweep(cfg: ScenarioConfig) -> ScenarioResult:
    rep = build_fock(sum(cfg.modes))
    triple = regional_triple(rep, *cfg.regions())
    residuals = [ssa_residual(random_state(rep, _SWEEP_KINDS[i % 3], int(s)), triple).residual
                 for i, s in enumerate(_seeds(cfg))]
    tol = cfg.tol["ssa"]
    return ScenarioResult(
        [Assertion.at_most("max_ssa_residual", max(residuals), tol),
         Assertion.at_most("violations", sum(r > tol for r in residuals), 0)],
        {"min_ssa_residual": min(residuals)})


def _square_triples(rep, regions) -> list[Triple]:
    a, b, c = regions
    triples = [regional_triple(rep, a, b, c), twisted_triple(rep, a, b, c)]
    # also every split of the modes into three nonempty consecutive blocks
    n = rep.n_modes
    for i in range(1, n - 1):
        for j in range(i + 1, n):
            triples.append(regional_triple(rep, range(1, i + 1), range(i + 1, j + 1),
                                           range(j + 1, n + 1)))
    return triples


def _scenario_commuting_square(cfg: ScenarioConfig) -> ScenarioResult:
    tol = cfg.tol["square"]
    rep = build_fock(sum(cfg.modes))
    result = ScenarioResult()
    worst = np.zeros(5)
    for t in _square_triples(rep, cfg.regions()):
        worst = np.maximum(worst, commuting_square_check(t.ab, t.bc, t.b, tol).residuals)
    geo = build_fock(5)
    tw = twisted_triple(geo, [1], [2, 3, 4], [5])
    tw_res = np.asarray(tw.square.residuals)
    for k in range(5):
        result.assertions.append(Assertion.at_most(f"condition_{k + 1}", worst[k], tol))
    result.assertions.append(Assertion.at_most("twisted_1_3_1_max", tw_res.max(), tol))

    # misuse: B not inside AB, and a nested triple that is not a square
    a, b, c = cfg.regions()
    try:
        commuting_square_check(regional_subalgebra(rep, a), regional_subalgebra(rep, b | c),
                               regional_subalgebra(rep, b), tol)
        rejected = False
    except NotNested:
        rejected = True
    result.assertions.append(Assertion.holds("not_nested_rejected", rejected))
    bad = Triple(regional_subalgebra(rep, a | b | c), regional_subalgebra(rep, a | b),
                 regional_subalgebra(rep, b | c), regional_subalgebra(rep, []),
                 regional_subalgebra(rep, a), "trivial-B")
    try:
        ssa_residual(random_state(rep, "general", cfg.seed), bad)
        rejected = False
    except TripleNotCommutingSquare:
        rejected = True
    result.assertions.append(Assertion.holds("non_square_rejected", rejected))
    result.diagnostics["twisted_residuals"] = [float(x) for x in tw_res]
    return result


def _even_product(rep, regions, seed: int) -> StateDensity:
    rng = np.random.default_rng(seed)
    parts = [restrict(random_state(rep, "even", int(rng.integers(2**31)), region=r),
                      regional_subalgebra(rep, r)) for r in regions]
    out = parts[0]
    for p in parts[1:]:
        out = product_extension(out, p)
    return out


def _scenario_markov_equivalence(cfg: ScenarioConfig) -> ScenarioResult:
    rep = build_fock(sum(cfg.modes))
    regions = cfg.regions()
    triple = regional_triple(rep, *regions)
    counts = {"random": 0, "product": 0, "block": 0}
    splits = markov_count = 0
    fp_worst = tsharp_worst = 0.0
    for i, s in enumerate(_seeds(cfg)):
        kind = ("random", "product", "block")[i % 3]
        counts[kind] += 1
        if kind == "random":
            psi = random_state(rep, "even", int(s))
        elif kind == "product":
            psi = _even_product(rep, regions, int(s))
        else:
            psi = block_markov_state(rep, *regions, seed=int(s))
        rep_i = markov_report(psi, triple, tol=cfg.tol["markov"])
        splits += not rep_i.consistent
        tsharp_worst = max(tsharp_worst, rep_i.t_sharp_b_error)
        if rep_i.verdict:
            markov_count += 1
            fp_worst = max(fp_worst, rep_i.fixed_point_error)
    return ScenarioResult(
        [Assertion.at_most("equivalence_splits", splits, 0),
         Assertion.at_least("markov_states", markov_count, 1),
         Assertion.at_least("non_markov_states", cfg.trials - markov_count,
                            1 if cfg.trials >= 3 else 0),
         Assertion.at_most("max_fixed_point_error_markov", fp_worst, cfg.tol["fixed_point"]),
         Assertion.at_most("max_t_sharp_b_error", tsharp_worst, cfg.tol["t_sharp"])],
        {f"count_{k}": v for k, v in counts.items()})


def _scenario_counterexample(cfg: ScenarioConfig) -> ScenarioResult:
    tol = cfg.tol
    lam = cfg.lam
    omega, spec = counterexample(lam, n_b=cfg.modes[1])
    rep = spec.rep
    a, b, c = spec.regions
    result = ScenarioResult()

    report = markov_report(omega, twisted_triple(rep, a, b, c), tol=tol["markov"])
    result.assertions += [
        Assertion.at_most("ssa_residual_abs", abs(report.ssa_residual), tol["markov"]),
        Assertion.at_most("recovery_error", report.recovery_error, tol["markov"]),
    ]
    omega_ac = restrict(omega, regional_subalgebra(rep, a | c))
    witness = hopping_witness(omega_ac, spec.hopping)
    image = jw_twist_image(omega_ac, a, c)
    twisted = certify(omega_ac, a, c, "twisted", spec.hopping,
                      [(comp.weight, comp.rho_ac) for comp in spec.components])
    car_cert = certify(omega_ac, a, c, "car", spec.hopping)
    try:
        verified = verify_decomposition(twisted, omega_ac)
    except ValueError:
        verified = False
    recon = tau_norm(sum(comp.weight * comp.rho_ac.rho for comp in spec.components)
                     - spec.rho_lambda)
    result.assertions += [
        Assertion.at_most("marginal_error", tau_norm(omega_ac.rho - spec.rho_lambda),
                          tol["marginal"]),
        Assertion.at_most("witness_error", abs(witness - lam / 8), tol["witness"]),
        Assertion.at_most("ppt_error", abs(twisted.ppt_min_eigenvalue - (1 - lam / 2) / 4),
                          tol["ppt"]),
        Assertion.at_least("ppt_min_eigenvalue", twisted.ppt_min_eigenvalue, 0.0),
        Assertion.at_most("decomposition_error", recon, tol["reconstruction"]),
        Assertion.holds("decomposition_verified", verified),
        Assertion.holds("car_pair_nonseparable", car_cert.verdict == "nonseparable"),
        Assertion.holds("twisted_pair_separable", twisted.verdict == "separable"),
    ]

    small = build_fock(3)
    reg3, tw3 = regional_triple(small, [1], [2], [3]), twisted_triple(small, [1], [2], [3])
    gap = 0.0
    for s in np.random.default_rng(cfg.seed).integers(0, 2**31, size=cfg.trials):
        psi = random_state(small, "even", int(s))
        gap = max(gap, abs(ssa_residual(psi, reg3).residual - ssa_residual(psi, tw3).residual))
    result.assertions.append(Assertion.at_most("even_regional_vs_twisted", gap, tol["lemma"]))

    regional = markov_report(omega, regional_triple(rep, a, b, c), tol=tol["markov"])
    result.diagnostics.update({
        "witness": witness,
        "ppt_min_eigenvalue": twisted.ppt_min_eigenvalue,
        "weights": [float(w) for w in spec.weights],
        "omega_odd_norm": omega.odd_norm,
        "regional_ssa_residual": regional.ssa_residual,
        "regional_recovery_error": regional.recovery_error,
    })
    result.matrices.update({"rho_lambda_AC": spec.rho_lambda, "twisted_image": image})
    return result


def _additivity_states(rep, regions, seeds):
    """Product extensions with an even factor mixed with generic states."""
    a, c = regions
    sub_a, sub_c = regional_subalgebra(rep, a), regional_subalgebra(rep, c)
    for i, s in enumerate(seeds):
        rng = np.random.default_rng(int(s))
        k = i % 6
        if k < 3:
            kinds = (("even", "general"), ("general", "even"), ("even", "even"))[k]
            pa = restrict(random_state(rep, kinds[0], int(rng.integers(2**31)), region=a), sub_a)
            pc = restrict(random_state(rep, kinds[1], int(rng.integers(2**31)), region=c), sub_c)
            yield "product", product_extension(pa, pc)
        else:
            yield "generic", random_state(rep, ("general", "even", "gauge_invariant")[k - 3],
                                          int(rng.integers(2**31)))


def _scenario_additivity_product(cfg: ScenarioConfig) -> ScenarioResult:
    tol = cfg.tol
    rep = build_fock(sum(cfg.modes))
    a, c = cfg.regions()
    splits = additive = 0
    worst_even = worst_eq = 0.0
    for _, psi in _additivity_states(rep, (a, c), _seeds(cfg)):
        pc = product_check(psi, a, c)
        is_additive = abs(pc.additivity_residual) <= tol["additivity"]
        splits += is_additive != pc.is_product
        if is_additive:
            additive += 1
            an = pc.analysis
            worst_even = max(worst_even, min(an.odd_norm_a, an.odd_norm_c))
            worst_eq = max(worst_eq, an.max_equation_residual)
    try:
        pa = restrict(random_state(rep, "general", cfg.seed, region=a), regional_subalgebra(rep, a))
        pc_ = restrict(random_state(rep, "general", cfg.seed + 1, region=c),
                       regional_subalgebra(rep, c))
        product_extension(pa, pc_)
        rejected = False
    except BothMarginalsNoneven:
        rejected = True
    return ScenarioResult(
        [Assertion.at_most("equivalence_splits", splits, 0),
         Assertion.at_most("max_min_marginal_odd_norm", worst_even, tol["even"]),
         Assertion.at_most("max_equation_residual", worst_eq, tol["equations"]),
         Assertion.holds("both_noneven_rejected", rejected)],
        {"additive_states": additive})


def _scenario_entropy_identities(cfg: ScenarioConfig) -> ScenarioResult:
    tol = cfg.tol
    n = sum(cfg.modes)
    rep = build_fock(n)
    a, b, c = cfg.regions()
    triple = regional_triple(rep, a, b, c)
    subs = [regional_subalgebra(rep, r) for r in (a, b, c, a | b, b | c)]
    offset = drop = local_err = mono = 0.0
    for i, s in enumerate(_seeds(cfg)):
        phi = random_state(rep, _SWEEP_KINDS[i % 3], int(s))
        d = phi.eigenvalues[phi.eigenvalues > 0] / rep.dim
        s_matrix = -float(np.sum(d * np.log(d)))
        offset = max(offset, abs(s_matrix - entropy_hat(phi) - n * math.log(2)),
                     abs(entropy_vn(phi) - s_matrix))
        sub = subs[i % len(subs)]
        phi_b = restrict(phi, sub)
        drop = max(drop, abs(entropy_hat(phi_b) - entropy_hat(phi)
                             - relative_entropy(phi, phi_b)))
        local = StateDensity(build_fock(len(sub.region)), sub.reduce(phi_b.rho))
        local_err = max(local_err, abs(entropy_hat(local) - entropy_hat(phi_b)))
        psi_bc = restrict(phi, triple.bc)
        lhs = relative_entropy(phi, psi_bc)
        psi_ab = restrict(phi, triple.ab)
        rhs = relative_entropy(psi_ab, restrict(psi_bc, triple.ab))
        mono = max(mono, rhs - lhs)
    return ScenarioResult(
        [Assertion.at_most("offset_error", offset, tol["offset"]),
         Assertion.at_most("entropy_drop_error", drop, tol["entropy_drop"]),
         Assertion.at_most("local_entropy_error", local_err, tol["local_entropy"]),
         Assertion.at_most("monotonicity_violation", mono, tol["monotonicity"])])


RUNNERS = {
    "ssa-sweep": _scenario_ssa_sweep,
    "commuting-square": _scenario_commuting_square,
    "markov-equivalence": _scenario_markov_equivalence,
    "counterexample": _scenario_counterexample,
    "additivity-product": _scenario_additivity_product,
    "entropy-identities": _scenario_entropy_identities,
}


def run_scenario(cfg: ScenarioConfig) -> tuple[int, dict]:
    result = RUNNERS[cfg.scenario](cfg)
    doc = emit_report(cfg, result)
    return (EXIT_PASS if result.passed else EXIT_FAIL), doc


# -- entry point ----------------------------------------------------------------

def _parse_modes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"--modes expects comma-separated integers, got {text!r}") from None


def _parse_tol(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        try:
            if not sep:
                raise ValueError
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="carmarkov", description=__doc__.split("\n\n")[0])
    p.add_argument("--scenario", required=True, help=f"one of: {', '.join(SCENARIOS)}")
    p.add_argument("--modes", help="region sizes, e.g. 1,1,1 (two sizes for additivity-product)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="correlation strength for the counterexample, in (0, 1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override a named tolerance (repeatable)")
    p.add_argument("--out", help="report path; .csv gives one row per assertion, else JSON")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ScenarioConfig.build(args.scenario, _parse_modes(args.modes) if args.modes else None,
                                   args.lam, args.seed, args.trials, _parse_tol(args.tol),
                                   args.out)
    except ConfigError as exc:
        placeholder = ScenarioConfig(args.scenario, (), args.lam, args.seed,
                                     args.trials or 0, {}, args.out)
        write_report(emit_report(placeholder, None, error=str(exc)), args.out)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, doc = run_scenario(cfg)
    write_report(doc, cfg.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
