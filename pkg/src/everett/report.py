"""Scenario configuration, verification runs and deterministic JSON reports."""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .ambiguity import (
    EquivalenceWitness,
    hadamard_primed_bases,
    match_to_unprimed,
    random_basis_search,
    unprimed_bases,
    verify_M2_for_basis,
)
from .errors import ConfigInvalid, DegenerateSpectrum, InvalidDimension, IoFailure
from .heisenberg import (
    EverettDecomposition,
    HeisenbergOperator,
    closed_form_branches,
    evolve_operator,
    expectation_consistency,
    extract_copy_structure,
    noncommuting_impossibility_check,
    permutation_equivalent,
)
from .measurement import (
    NotBranchForm,
    SystemState,
    build_model,
    check_branch_form,
    degenerate_pairs,
    ready_product,
    record_operator,
    schrodinger_evolve,
    verify_condition_M2,
    verify_condition_M4,
)
from .tensor import DEFAULT_TOLERANCES, ComplexOperator, Space, ToleranceProfile

__all__ = [
    "ScenarioConfig",
    "Check",
    "VerificationReport",
    "run_verify",
    "run_demo_ambiguity",
    "run_sweep",
    "run_decompose",
    "dumps",
    "emit_report",
    "operator_to_json",
    "operator_from_json",
    "vector_to_json",
    "vector_from_json",
]


# -- canonical JSON ----------------------------------------------------------

def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(c in text for c in ".eEn"):
        text += ".0"
    return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, ComplexOperator):
        return operator_to_json(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode_str(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    return _encode_str(obj)


def _encode_str(s: str) -> str:
    import json

    return json.dumps(s, ensure_ascii=False)


def dumps(obj) -> str:
    """Key-sorted JSON with floats at 17 significant digits, newline-terminated."""
    return _encode(_jsonable(obj), 2, 0) + "\n"


def operator_to_json(op: ComplexOperator) -> dict:
    return {
        "space": op.space.value,
        "dims": [op.dim, op.dim],
        "data": [[[float(z.real), float(z.imag)] for z in row] for row in op.data],
    }


def _complex_entries(raw, what: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"{what} entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def operator_from_json(doc: dict) -> ComplexOperator:
    try:
        data = _complex_entries(doc["data"], "operator")
        space = Space(doc.get("space", "OS"))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigInvalid({"operator": str(exc)}) from exc
    dims = doc.get("dims")
    if dims is not None and list(dims) != list(data.shape):
        raise ConfigInvalid({"operator": f"declared dims {dims} do not match data shape {list(data.shape)}"})
    try:
        return ComplexOperator(data, space)
    except ValueError as exc:
        raise ConfigInvalid({"operator": str(exc)}) from exc


def vector_to_json(vec: np.ndarray, space: Space) -> dict:
    vec = np.asarray(vec, dtype=np.complex128)
    return {"space": space.value, "dims": [vec.shape[0]], "data": [[float(z.real), float(z.imag)] for z in vec]}


def vector_from_json(doc: dict) -> np.ndarray:
    try:
        data = _complex_entries(doc["data"], "vector")
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigInvalid({"ready": str(exc)}) from exc
    if data.ndim != 1:
        raise ConfigInvalid({"ready": "vector data must be a flat list of [re, im] pairs"})
    return data


# -- configuration -----------------------------------------------------------

_CONFIG_KEYS = {"m", "duration", "psi", "beta", "alpha", "seed", "trials", "tolerances"}


@dataclass(frozen=True)
class ScenarioConfig:
    m: int = 2
    duration: float = 1.0
    psi: Optional[tuple] = None
    beta: Optional[tuple] = None
    alpha: Optional[tuple] = None
    seed: int = 0
    trials: int = 1000
    tolerances: ToleranceProfile = field(default=DEFAULT_TOLERANCES)

    @classmethod
    def from_dict(cls, doc: dict, seed_fallback: Optional[int] = None) -> "ScenarioConfig":
        """Validate a decoded JSON config, collecting every field error."""
        if not isinstance(doc, dict):
            raise ConfigInvalid({"config": "top level must be a JSON object"})
        errors = {}
        for key in sorted(set(doc) - _CONFIG_KEYS):
            errors[key] = "unknown field"

        def integer(key, default, minimum):
            value = doc.get(key, default)
            if isinstance(value, bool) or not isinstance(value, int):
                errors[key] = f"must be an integer, got {value!r}"
                return default
            if value < minimum:
                errors[key] = f"must be at least {minimum}"
            return value

        m = integer("m", 2, 2)
        if seed_fallback is None:
            seed_fallback = 0
        seed = integer("seed", seed_fallback, 0)
        trials = integer("trials", 1000, 1)
        duration = doc.get("duration", 1.0)
        if isinstance(duration, bool) or not isinstance(duration, (int, float)) or not (
            math.isfinite(duration) and duration > 0
        ):
            errors["duration"] = f"must be a positive finite number, got {duration!r}"
            duration = 1.0

        tolerances = DEFAULT_TOLERANCES
        if "tolerances" in doc:
            try:
                tolerances = DEFAULT_TOLERANCES.replace(**dict(doc["tolerances"]))
            except (TypeError, ValueError) as exc:
                errors["tolerances"] = str(exc)

        def real_list(key, length):
            if key not in doc or doc[key] is None:
                return None
            values = doc[key]
            if not isinstance(values, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in values
            ):
                errors[key] = "must be a list of finite real numbers"
                return None
            if isinstance(m, int) and len(values) != length:
                errors[key] = f"must have {length} entries, got {len(values)}"
                return None
            pairs = degenerate_pairs(values, tolerances.degeneracy_gap)
            if pairs:
                errors[key] = f"degenerate values at index pairs {pairs}"
                return None
            return tuple(float(v) for v in values)

        beta = real_list("beta", m + 1)
        alpha = real_list("alpha", m)

        psi = None
        if doc.get("psi") is not None:
            try:
                amps = _complex_entries(doc["psi"], "psi")
                if amps.shape != (m,):
                    errors["psi"] = f"must have {m} [re, im] pairs"
                elif abs(np.linalg.norm(amps) - 1.0) > tolerances.eq_tol:
                    errors["psi"] = f"state norm {np.linalg.norm(amps)!r} is not 1"
                else:
                    psi = tuple((float(z.real), float(z.imag)) for z in amps)
            except (TypeError, ValueError) as exc:
                errors["psi"] = str(exc)

        if errors:
            raise ConfigInvalid(errors)
        return cls(m, float(duration), psi, beta, alpha, seed, trials, tolerances)

    def state(self) -> SystemState:
        if self.psi is None:
            return SystemState.uniform(self.m)
        return SystemState(np.array([complex(re, im) for re, im in self.psi]), self.tolerances.eq_tol)

    def resolved_beta(self) -> tuple:
        return self.beta if self.beta is not None else tuple(float(i) for i in range(self.m + 1))

    def resolved_alpha(self) -> tuple:
        return self.alpha if self.alpha is not None else tuple(float(i) for i in range(1, self.m + 1))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "duration": self.duration,
            "psi": [list(p) for p in self.psi] if self.psi is not None else [[float(z.real), float(z.imag)] for z in self.state().psi],
            "beta": list(self.resolved_beta()),
            "alpha": list(self.resolved_alpha()),
            "seed": self.seed,
            "trials": self.trials,
            "tolerances": self.tolerances.as_dict(),
        }

    def config_hash(self) -> str:
        return hashlib.sha256(dumps(self.to_dict()).encode("utf-8")).hexdigest()

    def model(self):
        try:
            return build_model(self.m, self.duration, self.resolved_alpha(), self.resolved_beta(), self.tolerances)
        except DegenerateSpectrum as exc:
            raise ConfigInvalid({"beta/alpha": str(exc)}) from exc


# -- reports -----------------------------------------------------------------

@dataclass
class Check:
    name: str
    condition: str
    passed: bool
    residual: Optional[float]
    tolerance: Optional[float]
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "condition": self.condition,
            "passed": bool(self.passed),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    command: str
    scenario: dict
    checks: list
    counterexamples: int = 0
    config_hash: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and self.counterexamples == 0

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "scenario": self.scenario,
            "checks": [c.as_dict() for c in self.checks],
            "summary": {
                "passed": self.passed,
                "counterexamples": self.counterexamples,
                "checks_run": len(self.checks),
                "checks_failed": sum(not c.passed for c in self.checks),
            },
            "versions": {"artifact": __version__, "config_hash": self.config_hash},
        }

    def to_json(self) -> str:
        return dumps(self.as_dict())


def emit_report(report: VerificationReport, path) -> int:
    """Write the report as UTF-8 JSON; returns the exit status it implies.

    ``path`` may be ``"-"`` or ``None`` for standard output.
    """
    text = report.to_json()
    if path in (None, "-"):
        import sys

        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        try:
            with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoFailure(f"cannot write report to {path}: {exc}") from exc
    return 0 if report.passed else 1


def decomposition_to_json(dec: EverettDecomposition) -> dict:
    return {
        "canonical": dec.canonical,
        "residual": dec.residual,
        "branches": [
            {
                "record_value": br.record_value,
                "vector": [[float(z.real), float(z.imag)] for z in br.vector],
                "branch_op": operator_to_json(br.branch_op),
            }
            for br in dec.branches
        ],
    }


def _max_abs(values) -> float:
    return float(max(abs(v) for v in values)) if len(values) else 0.0


def run_verify(config: ScenarioConfig) -> VerificationReport:
    """Check M1-M4, the branch form of the evolved state, the Heisenberg copy
    structure of the record operator and agreement between the pictures."""
    tol = config.tolerances
    model = config.model()
    state = config.state()
    m = model.m
    checks = []

    ortho = max(
        float(np.linalg.norm(np.eye(m).conj().T @ np.eye(m) - np.eye(m))),
        float(np.linalg.norm(np.eye(m + 1).conj().T @ np.eye(m + 1) - np.eye(m + 1))),
    )
    checks.append(Check("apparatus_and_system_bases", "M1", ortho <= tol.eq_tol, ortho, tol.eq_tol,
                        {"dim_system": m, "dim_apparatus": m + 1}))

    m2 = verify_condition_M2(model)
    unitarity = float(np.linalg.norm(model.u.data.conj().T @ model.u.data - np.eye(model.dim)))
    checks.append(Check("ready_state_correlation", "M2", m2.passed, m2.residual, m2.tolerance,
                        {"per_branch": m2.detail["per_branch"], "unitarity_defect": unitarity,
                         "kappa": model.kappa, "kappa_times_duration": model.kappa * model.duration}))

    psi_in = ready_product(state.psi, m)
    m3 = abs(float(np.linalg.norm(psi_in)) - 1.0)
    checks.append(Check("initial_product_state", "M3", m3 <= tol.eq_tol, m3, tol.eq_tol, {}))

    coeffs = check_branch_form(schrodinger_evolve(model, state), model)
    if not isinstance(coeffs, NotBranchForm):
        err = _max_abs(coeffs - state.psi)
        checks.append(Check("evolved_branch_form", "M3prime", err <= tol.eq_tol, err, tol.eq_tol,
                            {"coefficients": list(coeffs)}))
    else:
        checks.append(Check("evolved_branch_form", "M3prime", False, coeffs.residual, tol.eq_tol,
                            {"reason": coeffs.reason}))

    b = record_operator(config.resolved_beta(), m)
    m4 = verify_condition_M4(model, b)
    checks.append(Check("record_observable", "M4", m4.passed, m4.residual, m4.tolerance,
                        {"degenerate_pairs": m4.detail["degenerate_pairs"], "min_gap": m4.detail["min_gap"]}))

    heis = evolve_operator(model, b)
    verdict = extract_copy_structure(heis, model.ready, tol, config.seed)
    reference = closed_form_branches(model, b)
    if verdict:
        perm = permutation_equivalent(reference, verdict, tol.residual_tol)
        ok = bool(perm) and verdict.residual <= tol.residual_tol
        checks.append(Check("heisenberg_everett_copies", "Heisenberg isolated measurement uniqueness", ok,
                            verdict.residual, tol.residual_tol,
                            {"permutation_to_closed_form": list(perm) if perm else None,
                             "decomposition": decomposition_to_json(verdict)}))
    else:
        checks.append(Check("heisenberg_everett_copies", "Heisenberg isolated measurement uniqueness", False,
                            verdict.residual, tol.residual_tol, {"reason": verdict.reason}))

    diff = expectation_consistency(model, b, state)
    checks.append(Check("picture_consistency", "Schrodinger/Heisenberg expectation agreement",
                        diff <= tol.eq_tol, diff, tol.eq_tol, {}))

    return VerificationReport("verify", config.to_dict(), checks, 0, config.config_hash())


def run_demo_ambiguity(config: Optional[ScenarioConfig] = None) -> VerificationReport:
    """Two-outcome basis-ambiguity example.

    The evolved equal-weight state looks just as biorthogonal in Hadamard
    rotated bases, yet those bases violate the correlation condition and are
    not a relabeling of the measurement bases.  Checks pass when the demo
    reproduces these facts.  The state is always the equal-weight one.
    """
    config = ScenarioConfig() if config is None else config
    if config.m != 2:
        raise InvalidDimension("the ambiguity demo is defined for m = 2 only")
    tol = config.tolerances
    model = config.model()
    psi_t = schrodinger_evolve(model, SystemState.uniform(2))
    primed = hadamard_primed_bases(model)
    checks = []

    kets = np.stack([np.kron(primed.o_basis[:, j + 1], primed.s_basis[:, j]) for j in range(2)], axis=1)
    rewrite = kets.conj().T @ psi_t
    rest = float(np.linalg.norm(psi_t - kets @ rewrite))
    target = 1.0 / math.sqrt(2.0)
    err = max(rest, _max_abs(rewrite - target))
    checks.append(Check("primed_rewrite", "M3prime", err <= 1e-12, err, 1e-12,
                        {"coefficients": list(rewrite), "expected": [target, target]}))

    # Branch 1 keeps overlap 1/sqrt(2) with its target ket; branch 2 lands on
    # a state orthogonal to its target.
    residuals = verify_M2_for_basis(model, primed)
    expected = (math.sqrt(2.0 - math.sqrt(2.0)), math.sqrt(2.0))
    for j, r in enumerate(residuals):
        checks.append(Check(f"primed_branch_{j + 1}_violates_M2", "M2", r > tol.eq_tol, r, tol.eq_tol,
                            {"expected_residual": expected[j],
                             "deviation_from_expected": abs(r - expected[j])}))

    u = model.u.data
    s1 = primed.s_basis[:, 0]
    overlap = complex(np.kron(primed.o_basis[:, 1], s1).conj() @ (u @ ready_product(s1, 2)))
    ov_err = abs(overlap - target)
    checks.append(Check("primed_branch_1_overlap", "M2", ov_err <= 1e-12, ov_err, 1e-12,
                        {"overlap": overlap, "expected": target}))

    verdict = match_to_unprimed(model, primed)
    checks.append(Check("hadamard_pair_not_equivalent", "Schrodinger isolated measurement uniqueness",
                        not verdict, None, None,
                        {"verdict": "equivalent" if verdict else "not_equivalent",
                         "reason": getattr(verdict, "reason", "")}))

    witness = match_to_unprimed(model, unprimed_bases(2))
    identity = isinstance(witness, EquivalenceWitness) and witness.permutation == (0, 1) and all(
        abs(a - 1) <= tol.eq_tol for a in witness.phases
    )
    checks.append(Check("unprimed_identity_witness", "Schrodinger isolated measurement uniqueness", identity,
                        None, None,
                        {"permutation": list(witness.permutation) if witness else None,
                         "phase_angles": list(witness.phase_angles) if witness else None}))

    return VerificationReport("demo-ambiguity", config.to_dict(), checks, 0, config.config_hash())


def random_distinct_values(n: int, rng: np.random.Generator, gap: float, spread: float = 5.0) -> np.ndarray:
    """``n`` random reals in ``[-spread, spread]`` with pairwise gaps above ``gap``."""
    while True:
        values = rng.uniform(-spread, spread, n)
        if not degenerate_pairs(values, max(gap, 1e-3)):
            return values


def random_recorded_operator(m: int, rng: np.random.Generator, gap: float) -> ComplexOperator:
    """Apparatus operator whose record states ``|O:1..M>`` are eigenvectors
    with distinct complex eigenvalues; its ready column is arbitrary."""
    d = np.zeros((m + 1, m + 1), dtype=np.complex128)
    d[1:, 1:] = np.diag(random_distinct_values(m, rng, gap) + 1j * rng.uniform(-1, 1, m))
    d[:, 0] = rng.standard_normal(m + 1) + 1j * rng.standard_normal(m + 1)
    return ComplexOperator(d, Space.O)


def _extraction_trial(m: int, rng: np.random.Generator, tol: ToleranceProfile, seeds) -> dict:
    beta = random_distinct_values(m + 1, rng, tol.degeneracy_gap)
    model = build_model(m, float(rng.uniform(0.5, 2.0)), None, beta, tol)
    b = model.record_operator()
    heis = evolve_operator(model, b)
    reference = closed_form_branches(model, b)
    decs = [extract_copy_structure(heis, model.ready, tol, s) for s in seeds]
    ok = all(decs)
    if ok:
        ok = all(permutation_equivalent(reference, d, tol.residual_tol) for d in decs)
        ok = ok and all(permutation_equivalent(decs[0], d, tol.residual_tol) for d in decs[1:])
        want = np.sort(beta[1:])
        ok = ok and all(
            _max_abs(np.array(sorted(d.record_values, key=lambda z: (z.real, z.imag))) - want) <= tol.eq_tol
            for d in decs
        )
    return {"ok": bool(ok), "residual": max((d.residual for d in decs if d), default=float("nan"))}


def _noncommuting_trial(m: int, rng: np.random.Generator, tol: ToleranceProfile, seed: int) -> dict:
    model = build_model(m, float(rng.uniform(0.5, 2.0)), random_distinct_values(m, rng, tol.degeneracy_gap), None, tol)
    d = random_recorded_operator(m, rng, tol.degeneracy_gap)
    rep = noncommuting_impossibility_check(model, model.pointer_operator(), d, tol, seed)
    ok = rep.applicable and rep.projector_match and rep.commutator_norm <= tol.eq_tol
    return {"ok": bool(ok), "commutator_norm": rep.commutator_norm}


def _trial_seeds(seed: int, trials: int) -> list:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1)[0]) for c in children]


def run_sweep(config: ScenarioConfig, extraction_seeds: int = 2) -> VerificationReport:
    """Randomized falsification sweeps; every counterexample is a failure.

    (a) primed bases satisfying the correlation condition but not matching
    the measurement bases, (b) extractions of ``b(t)`` that disagree across
    mixing seeds or with the closed form, (c) recorded apparatus operators
    whose copy structure picks a non-pointer system basis.
    """
    tol = config.tolerances
    model = config.model()
    m = config.m
    checks = []
    total = 0

    for ensemble, offset in (("haar", 0), ("structured", 1)):
        res = random_basis_search(model, config.trials, config.seed * 2 + offset, 1e-6, ensemble)
        total += res.counterexamples
        checks.append(Check(f"schrodinger_uniqueness_{ensemble}", "Schrodinger isolated measurement uniqueness",
                            res.counterexamples == 0, None, 1e-6,
                            {"trials": res.trials, "satisfying": res.satisfying,
                             "equivalent": res.equivalent, "counterexamples": res.counterexamples}))

    failures = 0
    worst = 0.0
    for s in _trial_seeds(config.seed, config.trials):
        rng = np.random.default_rng(s)
        out = _extraction_trial(m, rng, tol, [s + k for k in range(extraction_seeds)])
        failures += not out["ok"]
        if math.isfinite(out["residual"]):
            worst = max(worst, out["residual"])
    total += failures
    checks.append(Check("operator_expansion_uniqueness", "Operator expansion uniqueness", failures == 0,
                        worst, tol.residual_tol,
                        {"trials": config.trials, "mixing_seeds": extraction_seeds, "counterexamples": failures}))

    failures = 0
    worst = 0.0
    for s in _trial_seeds(config.seed + 1, config.trials):
        rng = np.random.default_rng(s)
        out = _noncommuting_trial(m, rng, tol, s)
        failures += not out["ok"]
        if out["commutator_norm"] is not None:
            worst = max(worst, out["commutator_norm"])
    total += failures
    checks.append(Check("noncommuting_impossibility", "No simultaneous measurement of noncommuting observables",
                        failures == 0, worst, tol.eq_tol,
                        {"trials": config.trials, "counterexamples": failures}))

    return VerificationReport("sweep", config.to_dict(), checks, total, config.config_hash())


def run_decompose(op: ComplexOperator, ready: np.ndarray, seed: int = 0,
                  tol: ToleranceProfile = DEFAULT_TOLERANCES) -> VerificationReport:
    """Run the copy-structure extractor on a user-supplied composite operator."""
    if op.space is not Space.OS:
        raise ConfigInvalid({"operator": "must be a composite (OS) operator"})
    if ready.shape != (op.m + 1,):
        raise ConfigInvalid({"ready": f"must have {op.m + 1} components for this operator"})
    if abs(np.linalg.norm(ready) - 1.0) > tol.eq_tol:
        raise ConfigInvalid({"ready": "must be normalized"})
    verdict = extract_copy_structure(HeisenbergOperator(op), ready, tol, seed)
    if verdict:
        detail = {"decomposition": decomposition_to_json(verdict)}
    else:
        detail = {"reason": verdict.reason}
    check = Check("everett_copy_condition", "Everett copy condition (Heisenberg picture)", bool(verdict),
                  verdict.residual, tol.residual_tol, detail)
    scenario = {"m": op.m, "seed": seed, "ready": vector_to_json(ready, Space.O), "tolerances": tol.as_dict()}
    digest = hashlib.sha256(dumps({"operator": operator_to_json(op), "scenario": scenario}).encode("utf-8")).hexdigest()
    return VerificationReport("decompose", scenario, [check], 0, digest)
