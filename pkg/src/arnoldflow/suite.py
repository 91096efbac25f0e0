"""Experiment suites: deterministic instance generation, the
calibrate-then-freeze protocol, and report emission.

Each criterion function is pure given (config, seed) and returns a
CriterionResult with per-instance rows, so the CLI can emit byte-identical
CSV output for a fixed configuration regardless of worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import birkhoff as bk
from .contfrac import (ContinuedFraction, check_diophantine,
                       construct_alpha_in_D, dist_qn_alpha, from_quadratic,
                       from_quotients, ostrowski_decode, ostrowski_encode)
from .errors import ConfigInvalid, HypothesisFailed, SingularOrbit
from .mobius import (BandObservable, kbsz_sum, mertens, mobius_sieve,
                     mu_trial, orthogonality_sum, usic_statistic)
from .orbit import (closest_return, engine_for, forward_backward_classify,
                    sigma_membership, spacing_check)
from .roof import ConstantRoof, CosProbe, RoofSpec, shear_coefficient
from .shear import (GoodTriple, StepFunction, almost_linear_check,
                    combinatorial_search, drift_sequence, splitting_time)
from .sl2 import (Mat2, drift_quadratic_check, g_mat, h_mat, local_coords,
                  product_identity_residual, renorm_residual, v_mat)
from .specialflow import FlowPoint, evolve, flow_samples, verify_rescaling

__all__ = ["ExperimentConfig", "CriterionResult", "run_suite",
           "CRITERIA", "CANONICAL_ROOF", "GROWTH_ROOF"]

CANONICAL_ROOF = RoofSpec(0.6, 0.3, 0.1)
GROWTH_ROOF = RoofSpec(1.5, 0.08, 0.05)

_CONFIG_KEYS = {"lemmas", "seed", "samples_scale", "out_dir", "format",
                "workers"}


@dataclass(frozen=True)
class ExperimentConfig:
    lemmas: tuple
    seed: int = 1
    samples_scale: float = 1.0   # shrink factor for smoke runs
    out_dir: str = "."
    format: tuple = ("csv", "json")
    workers: int = 1

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        lemmas = d.get("lemmas", [])
        if not isinstance(lemmas, (list, tuple)):
            raise ConfigInvalid("lemmas must be a list")
        bad = [x for x in lemmas if x not in CRITERIA]
        if bad:
            raise ConfigInvalid(f"unknown lemma selection: {bad}")
        seed = d.get("seed", 1)
        if not isinstance(seed, int):
            raise ConfigInvalid("seed must be an integer")
        scale = float(d.get("samples_scale", 1.0))
        if not 0.0 < scale <= 1.0:
            raise ConfigInvalid("samples_scale must lie in (0, 1]")
        workers = int(d.get("workers", 1))
        if workers < 1:
            raise ConfigInvalid("workers must be >= 1")
        return ExperimentConfig(tuple(lemmas), seed, scale,
                                d.get("out_dir", "."),
                                tuple(d.get("format", ("csv", "json"))),
                                workers)


@dataclass
class CriterionResult:
    name: str
    passed: bool
    rows: list = field(default_factory=list)   # per-instance dicts
    constants: dict = field(default_factory=dict)
    notes: str = ""
    runtime_s: float = 0.0
    expected_failure: bool = False


def _row(criterion, instance, lemma="", alpha="", x="", scale="",
         param="", measured="", bound="", margin="", passed=""):
    return {"criterion": criterion, "instance": instance, "lemma": lemma,
            "alpha": alpha, "x": x, "scale": scale, "param": param,
            "measured": measured, "bound": bound, "margin": margin,
            "passed": passed}


# ---------------------------------------------------------------------------
# shared alpha constructions


def golden_cf(depth: int = 45) -> ContinuedFraction:
    return from_quadratic(-1, 1, 5, 2, depth)


def sqrt2m1_cf(depth: int = 30) -> ContinuedFraction:
    return from_quadratic(-1, 1, 2, 1, depth)


def goodscale_alpha(depth: int = 45, gap: int = 3) -> ContinuedFraction:
    """Quotients just above log q_n every `gap` indices, so the
    good-time-scale hypotheses (q_n log q_n <= T < q_(n+1), with the
    hitting-set avoidance still of positive measure) are simultaneously
    satisfiable.  The prefix is consistent with the full growth condition
    (resonant witnesses can always be appended beyond any finite depth).
    """
    quotients = [1]
    q_prev, q_cur = 1, 1
    for n in range(1, depth):
        a_next = 1
        if n >= 5 and q_cur >= 3 and (n - 5) % gap == 0:
            a_next = max(3, math.ceil(2.0 * math.log(q_cur)))
        quotients.append(a_next)
        q_prev, q_cur = q_cur, a_next * q_cur + q_prev
    return from_quotients(quotients)


def jumbo_alpha(depth: int = 40, gap: int = 2) -> ContinuedFraction:
    """Quotients at the log^2 growth cap every `gap` indices: the widest
    resonant gaps the growth condition permits, used to open up the k- and
    w-ranges of the block estimates."""
    quotients = [1]
    q_prev, q_cur = 1, 1
    for n in range(1, depth):
        a_next = 1
        if n >= 6 and (n - 6) % gap == 0 and q_cur >= 20:
            a_next = max(2, int(math.log(q_cur) ** 2) - 1)
        quotients.append(a_next)
        q_prev, q_cur = q_cur, a_next * q_cur + q_prev
    return from_quotients(quotients)


def plant_point(cf: ContinuedFraction, n: int, b: float, i: int) -> float:
    """x whose q_n-orbit passes at distance ~ b/q_n from 0 at index i."""
    eng = engine_for(cf)
    return eng.position(b / cf.q[n], -i)


def _scales(cf: ContinuedFraction, q_lo: float, q_hi: float):
    return [n for n in range(2, cf.depth)
            if q_lo <= cf.q[n] <= q_hi and cf.q[n] >= 3]


# ---------------------------------------------------------------------------
# criterion 1: certified convergent distance bounds


def crit_cf_bounds(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rows, ok = [], True
    alphas = [("golden", golden_cf(32)), ("sqrt2m1", sqrt2m1_cf(32)),
              ("constructed", construct_alpha_in_D(3, 34))]
    i = 0
    for name, cf in alphas:
        top = cf.depth - 1 if cf.surd is not None else cf.depth - 2
        for n in range(1, min(top, 30) + 1):
            db = dist_qn_alpha(cf, n)
            ok &= db.certified
            rows.append(_row("cf-bounds", i, "2.4", name, scale=n,
                             measured=repr(db.value),
                             bound=f"({db.lower_bound},{db.upper_bound})",
                             passed=db.certified))
            i += 1
    return CriterionResult("cf-bounds", ok, rows, runtime_s=time.time() - t0)


# criterion 2: Ostrowski round trip


def crit_ostrowski(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    n_max = int(10 ** 5 * cfg.samples_scale)
    rows, ok = [], True
    for name, cf in (("golden", golden_cf(30)),
                     ("constructed", construct_alpha_in_D(3, 34))):
        fails = 0
        for N in range(1, n_max + 1):
            if ostrowski_decode(ostrowski_encode(N, cf)) != N:
                fails += 1
        ok &= fails == 0
        rows.append(_row("ostrowski", name, "2.4-ostrowski", name,
                         param=f"N<={n_max}", measured=fails, bound=0,
                         passed=fails == 0))
    return CriterionResult("ostrowski", ok, rows, runtime_s=time.time() - t0)


# criterion 3: Denjoy-Koksma


def crit_dk(cfg: ExperimentConfig) -> CriterionResult:
    """Exact Denjoy-Koksma inequality, vectorized across the x-sample.

    For each scale n with q_n <= 1e5 the cosine probe and the roof
    truncated at that same scale are summed along the q_n-orbits of 100
    random x simultaneously.
    """
    t0 = time.time()
    rng = random.Random(cfg.seed + 3)
    rows, ok = [], True
    n_x = max(4, int(100 * cfg.samples_scale))
    i = 0
    for name, cf in (("golden", golden_cf(40)), ("sqrt2m1", sqrt2m1_cf(30))):
        eng = engine_for(cf)
        scales = [n for n in range(2, cf.depth) if 3 <= cf.q[n] <= 10 ** 5]
        xs = np.array([rng.random() for _ in range(n_x)])
        for n in scales:
            qn = cf.q[n]
            base = eng.positions(0.0, 0, qn)
            pos = (xs[:, None] + base[None, :]) % 1.0
            for pname, probe in (("cos", CosProbe(1)),
                                 (f"trunc-{n}", CANONICAL_ROOF.truncate(n, cf))):
                sums = probe.eval(pos.ravel(), 0).reshape(pos.shape).sum(axis=1)
                bound = 2.0 * probe.variation(0)
                meas = np.abs(sums - qn * probe.integral())
                worst = float(meas.max())
                good = bool(worst <= bound)
                ok &= good
                rows.append(_row("denjoy-koksma", i, pname, name,
                                 f"{n_x} samples", n, measured=repr(worst),
                                 bound=repr(bound),
                                 margin=repr(bound - worst), passed=good))
                i += 1
    return CriterionResult("denjoy-koksma", ok, rows,
                           runtime_s=time.time() - t0)


# criterion 4: spacing


def crit_spacing(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 4)
    rows, ok = [], True
    i = 0
    for name, cf in (("golden", golden_cf(40)), ("sqrt2m1", sqrt2m1_cf(30))):
        for n in [n for n in range(1, cf.depth) if cf.q[n] <= 10 ** 4]:
            x = rng.random()
            sv = spacing_check(x, n, cf,
                               sweep_steps=10 if cf.q[n] <= 500 else 0)
            good = sv.min_gap_ok and sv.gap_cover_ok
            ok &= good
            rows.append(_row("spacing", i, "2.4-spacing", name, repr(x), n,
                             measured=repr(sv.min_gap),
                             bound=repr(sv.lower_bound), passed=good))
            i += 1
    return CriterionResult("spacing", ok, rows, runtime_s=time.time() - t0)


# criterion 5: oracle equivalence


def crit_oracles(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 5)
    rows, ok = [], True
    n_inst = max(10, int(1000 * cfg.samples_scale))
    alphas = [golden_cf(45), sqrt2m1_cf(30), construct_alpha_in_D(3, 45)]
    names = ["golden", "sqrt2m1", "constructed"]
    mism = {"closest": 0, "sigma": 0, "birkhoff": 0}
    for i in range(n_inst):
        k = rng.randrange(3)
        cf = alphas[k]
        x = rng.random()
        hi = max(n for n in range(cf.depth + 1) if cf.q[n] <= 10 ** 6)
        n = rng.randint(3, hi)
        c1 = closest_return(x, n, cf, "naive")
        c2 = closest_return(x, n, cf, "accelerated")
        if not (c1.i == c2.i and abs(c1.B - c2.B) <= 1e-8 * max(c1.B, 1e-30)):
            mism["closest"] += 1
    for i in range(n_inst):
        k = rng.randrange(3)
        cf = alphas[k]
        x = rng.random()
        cands = [n for n in range(2, cf.depth) if 10 <= cf.q[n + 1] <= 10 ** 5]
        n = rng.choice(cands)
        a = sigma_membership(x, n, 1.0, cf, "naive")
        b = sigma_membership(x, n, 1.0, cf, "accelerated")
        if bool(a) != bool(b):
            mism["sigma"] += 1
    roof = CANONICAL_ROOF
    for i in range(n_inst):
        k = rng.randrange(3)
        cf = alphas[k]
        x = rng.random()
        n = int(math.exp(rng.uniform(math.log(10), math.log(10 ** 6))))
        order = rng.choice([0, 1])
        try:
            a = bk.birkhoff_sum(roof, cf, x, n, order, "naive")
            b = bk.birkhoff_sum(roof, cf, x, n, order, "ostrowski-blocked")
        except SingularOrbit:
            continue
        if abs(a - b) > 1e-8 * max(abs(a), 1e-12):
            mism["birkhoff"] += 1
    for j, (key, v) in enumerate(sorted(mism.items())):
        ok &= v == 0
        rows.append(_row("oracle-equivalence", j, key,
                         param=f"{n_inst} instances", measured=v, bound=0,
                         passed=v == 0))
    return CriterionResult("oracle-equivalence", ok, rows,
                           runtime_s=time.time() - t0)


# criterion 6: growth law (documented as unattainable at desk scale;
# implemented faithfully and reported honestly)


def crit_growth(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 6)
    cf = construct_alpha_in_D(3, 45)
    roof = GROWTH_ROOF
    S = shear_coefficient(roof)
    rows = []
    verdicts = []
    specs = [(10 ** 5, 13, 5.1, 0.15, 1.0), (10 ** 6, 16, 1.05, 0.10, 0.9)]
    n_samp = max(4, int(30 * cfg.samples_scale))
    for idx, (r, n, M, tol, need_frac) in enumerate(specs):
        devs = []
        tries = 0
        while len(devs) < n_samp and tries < 400 * n_samp:
            tries += 1
            x = rng.random()
            try:
                rep = bk.verify_fprime_far(roof, x, r, n, M, 0.45, cf)
            except HypothesisFailed:
                continue
            gr = rep.details["growth_ratio"]
            devs.append(abs(gr - S) / abs(S))
        frac = float(np.mean([d <= tol for d in devs])) if devs else 0.0
        good = frac >= need_frac and len(devs) == n_samp
        verdicts.append(good)
        rows.append(_row("growth-law", idx, "6.4", "constructed",
                         scale=f"r={r}", param=f"tol={tol}",
                         measured=f"frac_within={frac:.3f}",
                         bound=f">={need_frac}", passed=good))
    return CriterionResult(
        "growth-law", all(verdicts), rows,
        notes=("finite-scale excess ~ c/log r with c ~ 2 exceeds the stated "
               "tolerance; see decisions ledger"),
        runtime_s=time.time() - t0, expected_failure=True)


# criterion 7: calibrate-freeze for 6.2, 6.3, 6.5, 6.6, 6.7-9


def _phase_62(roof, cf, rng, scales, constants=None):
    reports = []
    for n in scales:
        xs = [rng.random() for _ in range(4)]
        xs += [plant_point(cf, n, b, rng.randrange(cf.q[n]))
               for b in (0.05, 0.24, 0.26, 0.5, 0.9)]
        for x in xs:
            try:
                reports.append(bk.verify_special_times(roof, x, n, cf,
                                                       constants))
            except SingularOrbit:
                continue
    return reports


def _phase_63(roof, cf, rng, t_values, constant=None):
    reports = []
    for T in t_values:
        got = 0
        tries = 0
        while got < 4 and tries < 40:
            tries += 1
            x = rng.random()
            try:
                reports.append(bk.verify_f_bound(roof, x, T, cf, constant,
                                                 samples=120))
                got += 1
            except HypothesisFailed:
                continue
    return reports


def _phase_65(roof, cf, rng, scales, constant=None, constant_short=None):
    reports = []
    for n in scales:
        qn, qn1 = cf.q[n], cf.q[n + 1]
        T = int(qn * math.log(qn)) + 1
        if not T < qn1:
            continue
        M = min(0.9, max(0.6, 1.1 * T / qn1))
        got, tries = 0, 0
        while got < 4 and tries < 300:
            tries += 1
            x = rng.random()
            try:
                cr = closest_return(x, n, cf)
                r = int(cr.B * T / 2 * 0.9)
                s = max(0, r - max(1, int(0.25 ** 3 * cr.B * T * 0.9)))
                reports.append(bk.verify_fprime_goodscale(
                    roof, x, T, r, n, 0.25, cf, s=s, M=M,
                    constant=constant, constant_short=constant_short))
                got += 1
            except HypothesisFailed:
                continue
    return reports


def _phase_66(roof, cf, rng, r_values, constant=None):
    reports = []
    for r in r_values:
        for _ in range(5):
            x = rng.random()
            try:
                reports.append(bk.resonant_decomposition(roof, x, int(r), cf,
                                                         1.0, constant))
            except (HypothesisFailed, SingularOrbit):
                continue
    return reports


def _phase_679(roof, cf, rng, scales, constants=None):
    reports = []
    for n in scales:
        qn, qn1 = cf.q[n], cf.q[n + 1]
        if qn1 / qn < 8:
            continue
        for b in (0.42, 0.48):  # wide-approach probes; the k-range only
            # opens beyond ratio ~ 6/B^5, absent at desk scale (ledger)
            x = plant_point(cf, n, b, rng.randrange(qn))
            cr = closest_return(x, n, cf)
            kmax = int(cr.B ** 5 * qn1 / (6 * qn))
            if kmax < 1:
                continue
            for k in {1, max(1, kmax // 2), kmax}:
                try:
                    reports.append(bk.verify_higher_derivatives(
                        roof, x, n, cf, k=k, eps=cr.B ** 5 * 0.9,
                        constants=constants))
                except (HypothesisFailed, SingularOrbit):
                    continue
        for b in (0.12, 0.2, 0.28):  # close-approach instances (two-sided)
            x = plant_point(cf, n, b, rng.randrange(qn))
            cr = closest_return(x, n, cf)
            if not cr.B < 0.3:
                continue
            kmax = int(cr.B * qn1 / (6 * qn))
            wmax = int(max(cr.B * qn1 / 4.0 - qn, 0))
            ks = {k for k in (1, kmax) if 1 <= k}
            n0 = next(i for i in range(cf.depth + 1) if cf.q[i] >= 32)
            ws = {w for w in (cf.q[n0], wmax // 2, wmax) if w >= cf.q[n0]}
            for k in sorted(ks):
                for w in sorted(ws) or [None]:
                    try:
                        reports.append(bk.verify_higher_derivatives(
                            roof, x, n, cf, k=k, w=w, eps=0.2,
                            constants=constants))
                    except (HypothesisFailed, SingularOrbit):
                        continue
    return reports


def _calibrate_from(reports, keys=None) -> dict:
    """Freeze constants as headroom * max training ratio per sub-lemma."""
    ratios = {}
    def visit(rep):
        if rep.sub_reports:
            for s in rep.sub_reports:
                visit(s)
            return
        tag = rep.lemma_id
        r = rep.details.get("ratio")
        if r is not None and math.isfinite(r):
            ratios.setdefault(tag, []).append(r)
    for rep in reports:
        visit(rep)
    out = {}
    for tag, vals in ratios.items():
        out[tag] = {"max_train_ratio": max(vals),
                    "min_train_ratio": min(vals),
                    "frozen": bk.CALIBRATION_HEADROOM * max(vals),
                    "n_train": len(vals)}
    return out


def crit_calibrate_freeze(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 7)
    roof = CANONICAL_ROOF
    q_hi_test = 10 ** 6 * cfg.samples_scale
    rows, all_ok = [], True
    constants_out = {}
    i = 0

    def emit(lemma, phase, reports, alpha_name):
        nonlocal i, all_ok
        for rep in reports:
            def leaf(r):
                nonlocal i, all_ok
                if r.sub_reports:
                    for s in r.sub_reports:
                        leaf(s)
                    return
                if phase == "test":
                    all_ok &= bool(r.passed)
                rows.append(_row(
                    "calibrate-freeze", i, r.lemma_id, alpha_name,
                    repr(r.inputs.get("x", "")),
                    r.inputs.get("n", r.inputs.get("T", r.inputs.get("r", ""))),
                    phase, repr(r.measured), repr(r.bound), repr(r.margin),
                    "" if r.passed is None else r.passed))
                i += 1
            leaf(rep)

    # --- 6.2 ---------------------------------------------------------
    cf = construct_alpha_in_D(3, 45)
    train = _scales(cf, 30, 1000)
    test = [n for n in _scales(cf, 1000, q_hi_test) if cf.q[n] > 1000]
    reps = _phase_62(roof, cf, rng, train)
    cal = _calibrate_from(reps)
    consts62 = {k.split("-")[1]: v["frozen"] for k, v in cal.items()}
    emit("6.2", "train", reps, "constructed")
    reps = _phase_62(roof, cf, rng, test, consts62)
    emit("6.2", "test", reps, "constructed")
    constants_out["6.2"] = cal

    # --- 6.3 ---------------------------------------------------------
    reps = _phase_63(roof, cf, rng, (300, 600, 1000))
    cal = _calibrate_from(reps)
    c63 = cal["6.3"]["frozen"]
    emit("6.3", "train", reps, "constructed")
    t_test = [t for t in (3000, 10 ** 4, 10 ** 5, 10 ** 6)
              if t <= 10 ** 6 * cfg.samples_scale or t == 3000]
    reps = _phase_63(roof, cf, rng, t_test, c63)
    emit("6.3", "test", reps, "constructed")
    constants_out["6.3"] = cal

    # --- 6.5 ---------------------------------------------------------
    # The T-normalized residual drifts at desk scale, so the frozen
    # constant is composed the way the proof composes it: from the
    # resonant-decomposition constant calibrated on the same rotation
    # number plus the exact Ostrowski-tail constant of that number.
    gcf = goodscale_alpha(45, gap=2)
    train = [n for n in _scales(gcf, 30, 1000)]
    test = [n for n in _scales(gcf, 1000, q_hi_test) if gcf.q[n] > 1000]
    r_train_g = [int(r) for r in np.geomspace(gcf.q[4] + 1, 1000, 6)]
    reps_cf = _phase_66(roof, gcf, rng, r_train_g)
    cal_cf = _calibrate_from(reps_cf)
    c_f = cal_cf["6.6"]["frozen"]
    d_alpha = bk.delta_alpha(gcf)
    shear = abs(shear_coefficient(roof))
    c65 = (2.0 + d_alpha) * c_f + 2.0 * shear
    reps = _phase_65(roof, gcf, rng, train)
    cal = _calibrate_from(reps)
    c65_short = bk.CALIBRATION_HEADROOM ** 2 \
        * cal["6.5-cancshort"]["max_train_ratio"]
    emit("6.5", "train", reps, "goodscale")
    reps = _phase_65(roof, gcf, rng, test, c65, c65_short)
    emit("6.5", "test", reps, "goodscale")
    cal["6.5-canc"]["frozen"] = c65
    cal["6.5-cancshort"]["frozen"] = c65_short
    cal["6.5-canc"]["composition"] = {"c_f": c_f, "delta_alpha": d_alpha,
                                      "shear": shear}
    constants_out["6.5"] = cal

    # --- 6.6 ---------------------------------------------------------
    r_train = [r for r in np.geomspace(cf.q[4] + 1, 1000, 6).astype(int)]
    r_test = [r for r in np.geomspace(1500, 10 ** 6 * cfg.samples_scale, 8)
              .astype(int)]
    reps = _phase_66(roof, cf, rng, r_train)
    cal = _calibrate_from(reps)
    c66 = cal["6.6"]["frozen"]
    emit("6.6", "train", reps, "constructed")
    reps = _phase_66(roof, cf, rng, r_test, c66)
    emit("6.6", "test", reps, "constructed")
    constants_out["6.6"] = cal

    # --- 6.7-6.9 ------------------------------------------------------
    jcf = jumbo_alpha(40)
    train = [n for n in _scales(jcf, 30, 1000)]
    test = [n for n in _scales(jcf, 1000, q_hi_test) if jcf.q[n] > 1000]
    reps = _phase_679(roof, jcf, rng, train)
    cal = _calibrate_from(reps)
    c679 = {}
    sevens = [v["frozen"] for k, v in cal.items() if k.startswith("6.7")]
    if sevens:
        c679["c67"] = max(sevens)
    eights = [v for k, v in cal.items() if k.startswith("6.8")]
    if eights:
        c679["c68_hi"] = bk.CALIBRATION_HEADROOM * max(
            v["max_train_ratio"] for v in eights)
        c679["c68_lo"] = min(v["min_train_ratio"] for v in eights) \
            / bk.CALIBRATION_HEADROOM
    if "6.9" in cal:
        c679["c69"] = cal["6.9"]["frozen"]
    emit("6.7-9", "train", reps, "jumbo")
    reps = _phase_679(roof, jcf, rng, test, c679)
    emit("6.7-9", "test", reps, "jumbo")
    covered = {r["lemma"].split("-")[0] for r in rows if r["param"] == "test"}
    all_ok &= {"6.2", "6.3", "6.5", "6.6", "6.8", "6.9"} <= covered
    constants_out["6.7-9"] = {
        "cal": cal, "frozen": c679,
        "c67_note": ("wide-approach k-range is empty below q_n ~ 7e5 for "
                     "every growth-legal rotation number (see ledger)")}

    return CriterionResult("calibrate-freeze", all_ok, rows, constants_out,
                           runtime_s=time.time() - t0)


# criterion 8: flow laws


def crit_flow_laws(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 8)
    cf = golden_cf(40)
    roof = CANONICAL_ROOF
    rows, ok = [], True
    n_inst = max(5, int(100 * cfg.samples_scale))
    worst_semi = worst_resc = 0.0
    for i in range(n_inst):
        z = rng.random()
        p = FlowPoint(z, rng.random() * float(roof.eval(z)) * 0.95)
        t1, t2 = rng.uniform(-500, 500), rng.uniform(-500, 500)
        a = evolve(roof, cf, evolve(roof, cf, p, t1), t2)
        b = evolve(roof, cf, p, t1 + t2)
        resid = abs(a.z - b.z) + abs(a.r - b.r)
        worst_semi = max(worst_semi, resid)
        rep = verify_rescaling(roof, cf, rng.choice([0.5, math.pi / 3, 2.0]),
                               p, rng.uniform(-200, 200))
        worst_resc = max(worst_resc, rep.measured)
    ok = worst_semi < 1e-8 and worst_resc < 1e-8
    rows.append(_row("flow-laws", 0, "semigroup", "golden",
                     measured=repr(worst_semi), bound="1e-08",
                     passed=worst_semi < 1e-8))
    rows.append(_row("flow-laws", 1, "rescaling", "golden",
                     measured=repr(worst_resc), bound="1e-08",
                     passed=worst_resc < 1e-8))
    return CriterionResult("flow-laws", ok, rows, runtime_s=time.time() - t0)


# criterion 9: almost-linear reparametrizations


def _random_triple(rng) -> GoodTriple:
    """Valid-by-construction PAL or SAL triple with a random probe-scale."""
    M = rng.uniform(0.0, 50.0)
    L = rng.uniform(5.0, 60.0)
    xi = rng.uniform(0.01, 0.3)
    d = rng.uniform(0.05, 0.9)
    if rng.random() < 0.5:
        v = rng.randint(1, max(1, min(int(L / d), 25)))
        # v slots of equal width; total gap strictly below xi * L
        gap_total = rng.uniform(0.0, 0.9 * xi) * L
        gap = gap_total / v
        slot = (L - gap_total) / v
        pieces = []
        R = rng.uniform(-0.9, 0.9) * xi * L
        pos = M
        for _ in range(v):
            pieces.append((pos, pos + slot, R))
            pos += slot + gap
            R += rng.uniform(-0.9 * xi, 0.9 * xi)
        return GoodTriple(M, L, d, xi, "PAL", tuple(pieces))
    amp = rng.uniform(0.0, 0.8) * xi
    freq = rng.uniform(0.2, 2.0) * 2 * math.pi / L
    phase = rng.uniform(0, 2 * math.pi)
    off = rng.uniform(-0.5, 0.5) * xi * L * 0.5
    return GoodTriple(
        M, L, d, xi, "SAL",
        a_fun=lambda t, a=amp, f=freq, ph=phase, o=off:
            t + o + (a / f) * math.sin(f * (t - M) + ph)
            - (a / f) * math.sin(ph),
        a_deriv=lambda t, a=amp, f=freq, ph=phase:
            1.0 + a * math.cos(f * (t - M) + ph))


def _random_probe(rng) -> StepFunction:
    k = rng.randint(1, 6)
    breaks = sorted(rng.uniform(-20.0, 150.0) for _ in range(k + 1))
    levels = [rng.uniform(0.05, 1.0) for _ in range(k)]
    return StepFunction(tuple(breaks), tuple(levels))


def crit_pal_sal(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 9)
    rows, ok = [], True
    n_inst = max(20, int(1000 * cfg.samples_scale))
    violations = 0
    made = 0
    guard = 0
    while made < n_inst and guard < 20 * n_inst:
        guard += 1
        try:
            tri = _random_triple(rng)
            tri.validate()
        except Exception:
            continue
        rep = almost_linear_check(tri, _random_probe(rng))
        made += 1
        if not rep.passed:
            violations += 1
            rows.append(_row("pal-sal", made, "3.1", "", param=tri.kind,
                             measured=repr(rep.measured),
                             bound=repr(rep.bound), passed=False))
    ok = violations == 0 and made == n_inst
    rows.append(_row("pal-sal", "summary", "3.1",
                     param=f"{made} triples", measured=violations, bound=0,
                     passed=ok))
    return CriterionResult("pal-sal", ok, rows, runtime_s=time.time() - t0)


# criterion 10: combinatorial grid lemma


def crit_comb(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rows = []
    adm = combinatorial_search(1, 2, 1, 3, 10, 0.01, grid=1000)
    exc = combinatorial_search(1, 2, 1, 2, 10, 0.01)
    ok = bool(adm.passed) and bool(exc.passed) \
        and exc.vanishing_family_max <= 1e-12
    rows.append(_row("combinatorial", 0, "6.10", param="U1V2p1q3K10",
                     measured=repr(adm.min_over_grid), bound="10",
                     passed=bool(adm.passed)))
    rows.append(_row("combinatorial", 1, "6.10", param="excluded p1q2",
                     measured=repr(exc.vanishing_family_max), bound="1e-12",
                     passed=bool(exc.passed)))
    return CriterionResult("combinatorial", ok, rows,
                           {"c_threshold": adm.c_threshold},
                           runtime_s=time.time() - t0)


# criterion 11: SL(2,R) identities


def crit_sl2(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 11)
    rows, ok = [], True
    n_inst = max(20, int(1000 * cfg.samples_scale))
    worst_renorm = worst_decomp = worst_prod = 0.0
    for _ in range(n_inst):
        t = rng.uniform(-10 ** 6, 10 ** 6)
        s = rng.uniform(-8, 8)
        resid = renorm_residual(t, s)
        contract = 1e-10 * (1.0 + abs(t) * math.exp(abs(s)))
        worst_renorm = max(worst_renorm, resid / contract)
        vb, ss, rr = rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), \
            rng.uniform(-0.05, 0.05)
        Y = _random_sl2(rng)
        X = (h_mat(vb) @ Mat2(math.exp(ss), 0.0, rr, math.exp(-ss))) @ Y
        v2, s2, r2, resid2 = local_coords(X, Y)
        worst_decomp = max(worst_decomp, resid2)
        if r2 != 0:
            T = rng.uniform(-1, 1) / math.sqrt(abs(r2))
            worst_prod = max(worst_prod, product_identity_residual(X, Y, T))
    d = drift_quadratic_check(0.3, 1e-4, np.linspace(1, 300, 400))
    ok = (worst_renorm < 1.0 and worst_decomp < 1e-10 and worst_prod < 1e-9
          and d["quadratic_coeff_error"] < 1e-10)
    rows.append(_row("sl2", 0, "renorm", measured=repr(worst_renorm),
                     bound="1.0", passed=worst_renorm < 1.0))
    rows.append(_row("sl2", 1, "decomposition", measured=repr(worst_decomp),
                     bound="1e-10", passed=worst_decomp < 1e-10))
    rows.append(_row("sl2", 2, "product-identity", measured=repr(worst_prod),
                     bound="1e-09", passed=worst_prod < 1e-9))
    rows.append(_row("sl2", 3, "chi-quadratic",
                     measured=repr(d["quadratic_coeff_error"]), bound="1e-10",
                     passed=d["quadratic_coeff_error"] < 1e-10))
    return CriterionResult("sl2", ok, rows, runtime_s=time.time() - t0)


def _random_sl2(rng) -> Mat2:
    a = rng.uniform(0.5, 2.0)
    b = rng.uniform(-1.0, 1.0)
    c = rng.uniform(-1.0, 1.0)
    return Mat2(a, b, c, (1.0 + b * c) / a)


# criterion 12: Mobius statistics


def crit_mobius(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 12)
    rows, ok = [], True
    n_sieve = int(10 ** 6 * max(cfg.samples_scale, 0.01))
    table = mobius_sieve(max(n_sieve, 2 * 10 ** 4))
    sample = rng.sample(range(1, table.N + 1),
                        max(100, int(10 ** 4 * cfg.samples_scale)))
    bad = sum(table.mu(n) != mu_trial(n) for n in sample)
    rows.append(_row("mobius", 0, "sieve-vs-trial",
                     param=f"{len(sample)} samples", measured=bad, bound=0,
                     passed=bad == 0))
    ok &= bad == 0
    m = mertens(table.N, table)
    mer_ok = abs(m) / table.N < 1e-3
    rows.append(_row("mobius", 1, "mertens", scale=table.N,
                     measured=repr(abs(m) / table.N), bound="1e-03",
                     passed=mer_ok))
    ok &= mer_ok
    # flow-coupled orthogonality trend over decades of N
    cf = construct_alpha_in_D(3, 45)
    roof = CANONICAL_ROOF
    obs = BandObservable(roof, 0.15, 0.55, 0.1, 0.6)
    n_top = int(10 ** 6 * cfg.samples_scale)
    n_grid = [n for n in (10 ** 4, 10 ** 5, 10 ** 6) if n <= max(n_top, 10 ** 4)]
    starts = [FlowPoint(0.1 + 0.09 * k, 0.05) for k in range(8)]
    t0_step = 1.0
    if table.N < n_grid[-1]:
        table = mobius_sieve(n_grid[-1])
    means = []
    for N in n_grid:
        vals = [abs(orthogonality_sum(obs, roof, cf, p0, t0_step, table, N))
                for p0 in starts]
        means.append(float(np.mean(vals)))
    trend_ok = all(b <= a * (1 + 1e-9) for a, b in zip(means, means[1:]))
    rows.append(_row("mobius", 2, "orthogonality-trend",
                     param=str(n_grid), measured=repr(means),
                     passed=trend_ok))
    ok &= trend_ok
    # USIC short-interval trend with H ~ sqrt(M)
    m_grid = [(10 ** 3, 31), (10 ** 4, 100), (10 ** 5, 316)]
    m_grid = [(M, H) for (M, H) in m_grid if 2 * M + H <= table.N]
    z, r, _ = flow_samples(roof, cf, FlowPoint(0.37, 0.1), t0_step,
                           2 * m_grid[-1][0] + m_grid[-1][1])
    seq = np.concatenate([[0.0], obs.sample(z, r)])
    usic_vals = [usic_statistic(seq, table, M, H) for (M, H) in m_grid]
    usic_ok = all(b <= a * (1 + 1e-9) for a, b in zip(usic_vals, usic_vals[1:]))
    rows.append(_row("mobius", 3, "usic-trend", param=str(m_grid),
                     measured=repr(usic_vals), passed=usic_ok))
    ok &= usic_ok
    return CriterionResult("mobius", ok, rows, runtime_s=time.time() - t0)


# criterion 13: forward/backward disjunction


def crit_forward_backward(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(cfg.seed + 13)
    rows, ok = [], True
    n_inst = max(20, int(1000 * cfg.samples_scale))
    alphas = [("golden", golden_cf(40)), ("constructed",
                                          construct_alpha_in_D(3, 40))]
    kept = violations = 0
    tries = 0
    while kept < n_inst and tries < 40 * n_inst:
        tries += 1
        name, cf = alphas[rng.randrange(2)]
        hi = max(s for s in range(3, cf.depth - 1) if cf.q[s + 1] <= 10 ** 7)
        s = rng.randint(5, hi)
        qs = cf.q[s]
        if qs < 3:
            continue
        # couple the pair distance to the variation scale of s
        top = 1.0 / (qs * math.log(qs))
        bot = max(1.0 / (cf.q[s + 1] * math.log(cf.q[s + 1])), 1e-12)
        y = rng.random()
        yp = (y + math.exp(rng.uniform(math.log(bot), math.log(top)))) % 1.0
        res = forward_backward_classify(y, yp, s, cf)
        if not res.hypothesis_holds:
            continue
        kept += 1
        if res.lemma_violated:
            violations += 1
            rows.append(_row("forward-backward", kept, "7.1", name, repr(y),
                             s, measured="violation", passed=False))
    ok = violations == 0 and kept == n_inst
    rows.append(_row("forward-backward", "summary", "7.1",
                     param=f"{kept} admissible pairs", measured=violations,
                     bound=0, passed=ok))
    return CriterionResult("forward-backward", ok, rows,
                           runtime_s=time.time() - t0)


# criterion 14: determinism (handled by run_suite output comparison)


def crit_determinism(cfg: ExperimentConfig) -> CriterionResult:
    t0 = time.time()
    sub = ExperimentConfig(("cf-bounds", "combinatorial", "sl2"),
                           seed=cfg.seed, samples_scale=0.05)
    out1 = _render_csv(_run_criteria(sub))
    out2 = _render_csv(_run_criteria(sub))
    ok = out1 == out2
    rows = [_row("determinism", 0, param="two runs, fixed seed",
                 measured=f"{len(out1)} bytes", passed=ok)]
    return CriterionResult("determinism", ok, rows,
                           runtime_s=time.time() - t0)


# ---------------------------------------------------------------------------
# registry and the runner

CRITERIA: dict = {
    "cf-bounds": crit_cf_bounds,
    "ostrowski": crit_ostrowski,
    "denjoy-koksma": crit_dk,
    "spacing": crit_spacing,
    "oracle-equivalence": crit_oracles,
    "growth-law": crit_growth,
    "calibrate-freeze": crit_calibrate_freeze,
    "flow-laws": crit_flow_laws,
    "pal-sal": crit_pal_sal,
    "combinatorial": crit_comb,
    "sl2": crit_sl2,
    "mobius": crit_mobius,
    "forward-backward": crit_forward_backward,
    "determinism": crit_determinism,
}

_CSV_COLUMNS = ["criterion", "instance", "lemma", "alpha", "x", "scale",
                "param", "measured", "bound", "margin", "passed"]


def _run_criteria(cfg: ExperimentConfig):
    results = []
    for name in cfg.lemmas:
        results.append(CRITERIA[name](cfg))
    return results


def _render_csv(results) -> bytes:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=_CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for res in results:
        for row in res.rows:
            w.writerow({k: row.get(k, "") for k in _CSV_COLUMNS})
    return buf.getvalue().encode()


def run_suite(cfg: ExperimentConfig, write_files: bool = True):
    """Run the selected criteria; emit CSV rows and a JSON summary.

    Exit status 0 iff every mandatory (non-expected-failure) criterion
    passed.  Outputs are byte-identical for identical (config, seed).
    """
    import os

    if cfg.workers > 1:
        import multiprocessing as mp
        with mp.get_context("fork").Pool(cfg.workers) as pool:
            results = pool.map(_run_one, [(name, cfg) for name in cfg.lemmas])
    else:
        results = _run_criteria(cfg)
    csv_bytes = _render_csv(results)
    summary = {
        "schema_version": 1,
        "seed": cfg.seed,
        "samples_scale": cfg.samples_scale,
        "criteria": {
            res.name: {
                "passed": res.passed,
                "expected_failure": res.expected_failure,
                "rows": len(res.rows),
                "runtime_s": round(res.runtime_s, 3),
                "constants": res.constants,
                "notes": res.notes,
            } for res in results},
    }
    mandatory_ok = all(res.passed or res.expected_failure for res in results)
    summary["all_mandatory_passed"] = mandatory_ok
    if write_files:
        os.makedirs(cfg.out_dir, exist_ok=True)
        if "csv" in cfg.format:
            with open(os.path.join(cfg.out_dir, "suite.csv"), "wb") as f:
                f.write(csv_bytes)
        if "json" in cfg.format:
            with open(os.path.join(cfg.out_dir, "suite.json"), "w") as f:
                json.dump(summary, f, indent=2, sort_keys=True, default=str)
    return (0 if mandatory_ok else 1), csv_bytes, summary


def _run_one(args):
    name, cfg = args
    return CRITERIA[name](cfg)
