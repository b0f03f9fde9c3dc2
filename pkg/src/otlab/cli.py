"""Command-line front end.

Subcommands: `run` (honest protocol sessions), `attack` (adversary
campaigns), `rates` (achievable-rate table and curve), `code-audit`
(distance and square structure of a stored code), `replay` (re-run a
report and compare).

Every subcommand is a pure function of (config, master seed) to its
report: trial t always draws from the child stream (seed, 0, t), setup
randomness from (seed, 1), campaign streams from (seed, 2...), so the
worker count never changes the bytes.  Reports are canonical JSON
validated against the schema shipped with the package.

Exit codes: 0 success, 2 config error, 3 enumeration limit, 4 aborts
dominated a run (half or more of the sessions).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .adversary import (audit_bob_strategies, detection_campaign,
                        detection_rule, expected_unerased,
                        tracker_advantage_p0)
from .analysis import optimize_rate_p0, rate_chain, rate_curve, rate_p0
from .channels import BscParams, derive_rng
from .codes import (DEFAULT_ENUM_LIMIT, EnumerationLimit, LinearCode,
                    OrthonormalCode, code_from_json, orthonormalize,
                    random_code)
from .gf import GF
from .linalg import Matrix
from .proto_outer import OuterParams, compressed_length, run_session
from .proto_p0 import P0Params, p0_run, p0_secret_length, p0q_run
from .reports import build_report, canonical_json, write_csv, write_report

ENV_SEED = "OTLAB_SEED"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENUM = 3
EXIT_ABORT = 4

PROTOCOLS = ("p0", "p0q", "p1", "p1prime", "p2", "p2prime")
STRATEGIES = ("honest", "tracker", "bob")

DEFAULT_N0 = 15
DEFAULT_PHI = 0.198
DEFAULT_DELTA = 0.05
DEFAULT_C = 1.0
CODE_SEARCH_TRIES = 32


class ConfigError(Exception):
    """Bad or inconsistent configuration; maps to exit code 2."""


# -- config plumbing --------------------------------------------------------

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}

_KEY_TYPES = {
    "protocol": str, "strategy": str, "sweep_grid": str,
    "phi": float, "delta": float, "c": float, "slack": float,
    "code_rate": float,
    "n0": int, "n": int, "m": int, "q": int, "trials": int,
    "transcripts": int, "corrupted": int, "enum_limit": int,
    "curve_points": int, "pair_samples": int, "seed": int,
    "curve": bool, "sweep": bool,
    "code": "file", "outer_code": "file",
}

_COMMAND_KEYS = {
    "run": ("protocol", "phi", "n0", "n", "m", "q", "delta", "c", "slack",
            "trials", "transcripts", "code", "outer_code", "enum_limit"),
    "attack": ("strategy", "phi", "n0", "n", "corrupted", "c", "trials",
               "delta", "outer_code", "pair_samples", "sweep", "sweep_grid",
               "enum_limit"),
    "rates": ("phi", "code_rate", "q", "curve", "curve_points"),
    "code-audit": ("code", "enum_limit"),
}

_DEFAULTS = {
    "run": {"protocol": "p0", "phi": DEFAULT_PHI, "n0": None, "n": None,
            "m": 1, "q": None, "delta": None, "c": DEFAULT_C, "slack": 0.0,
            "trials": 100, "transcripts": 0, "code": None, "outer_code": None,
            "enum_limit": DEFAULT_ENUM_LIMIT},
    "attack": {"strategy": "tracker", "phi": DEFAULT_PHI, "n0": DEFAULT_N0,
               "n": None, "corrupted": None, "c": DEFAULT_C, "trials": 1000,
               "delta": None, "outer_code": None, "pair_samples": None,
               "sweep": False, "sweep_grid": None,
               "enum_limit": DEFAULT_ENUM_LIMIT},
    "rates": {"phi": None, "code_rate": None, "q": None, "curve": False,
              "curve_points": 99},
    "code-audit": {"code": None, "enum_limit": DEFAULT_ENUM_LIMIT},
}


def parse_config_file(path: str) -> dict:
    """Flat `key = value` lines; `#` starts a comment, blanks are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{ln}: expected `key = value`")
        out[key.strip()] = value.strip()
    return out


def _coerce(key: str, raw):
    kind = _KEY_TYPES.get(key)
    if kind is None:
        raise ConfigError(f"unknown config key `{key}`")
    if raw is None:
        return None
    if kind == "file":
        return raw  # a path string, or an inline dict from a replay
    if not isinstance(raw, str):
        return kind(raw)
    if kind is bool:
        word = raw.lower()
        if word not in _BOOL_WORDS:
            raise ConfigError(f"`{key}` expects true/false, got {raw!r}")
        return _BOOL_WORDS[word]
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(
            f"`{key}` expects {kind.__name__}, got {raw!r}") from exc


def _load_code_value(key: str, value):
    """Paths become inline code JSON so reports are self-contained."""
    if value is None or isinstance(value, dict):
        return value
    try:
        obj = json.loads(Path(value).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {key} file {value}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{key} file {value} is not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{key} file {value} must hold a JSON object")
    return obj


def resolve_config(command: str, file_cfg: dict,
                   flag_cfg: dict) -> tuple[dict, Optional[int]]:
    """Merge defaults < config file < flags; load referenced code files."""
    keys = _COMMAND_KEYS[command]
    merged = dict(_DEFAULTS[command])
    file_seed = None
    for source in (file_cfg, flag_cfg):
        for key, value in source.items():
            if key == "seed":
                file_seed = _coerce("seed", value)
                continue
            if key not in keys:
                raise ConfigError(
                    f"`{key}` is not a {command} option (valid: "
                    f"{', '.join(keys)}, seed)")
            merged[key] = _coerce(key, value)
    for key in ("code", "outer_code"):
        if key in merged:
            merged[key] = _load_code_value(key, merged[key])
    return merged, file_seed


def resolve_seed(flag_seed: Optional[int], file_seed: Optional[int]) -> int:
    if flag_seed is not None:
        seed = flag_seed
    elif file_seed is not None:
        seed = file_seed
    elif os.environ.get(ENV_SEED):
        try:
            seed = int(os.environ[ENV_SEED])
        except ValueError as exc:
            raise ConfigError(
                f"${ENV_SEED} must be an integer, got "
                f"{os.environ[ENV_SEED]!r}") from exc
    else:
        seed = 0
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    return seed


def _take(config: dict, command: str) -> dict:
    """Known keys with defaults filled; replayed extras are rejected."""
    keys = _COMMAND_KEYS[command]
    extra = set(config) - set(keys)
    if extra:
        raise ConfigError(
            f"unknown {command} config keys: {', '.join(sorted(extra))}")
    return {k: config.get(k, _DEFAULTS[command][k]) for k in keys}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


# -- run subcommand ----------------------------------------------------------

@dataclass
class RunSetup:
    protocol: str
    inner: P0Params
    outer: Optional[OuterParams]
    q: int
    block_syms: int
    compressed: bool
    sessions_per_trial: int
    transcripts: int
    inner_distance: Optional[int]


def _toy_compressed_basis(field) -> OrthonormalCode:
    """[I_4 | ones] has orthonormal rows over any of our fields."""
    rows = tuple(tuple(1 if j == i else 0 for j in range(4)) + (1, 1, 1, 1)
                 for i in range(4))
    return OrthonormalCode(Matrix(field, rows))


def _default_inner_code(n0: int, bits: int, limit: int,
                        rng: np.random.Generator) -> tuple[LinearCode, Optional[int]]:
    if bits == 1:
        return LinearCode(Matrix(GF(1), ((1,) * n0,))), n0
    best = None
    best_d = -1
    for _ in range(CODE_SEARCH_TRIES):
        cand = random_code(GF(1), n0, bits, rng)
        d = cand.min_distance(limit)
        if d > best_d:
            best, best_d = cand, d
    return best, best_d


def _normalize_run(config: dict, seed: int) -> tuple[dict, RunSetup]:
    cfg = _take(config, "run")
    protocol = cfg["protocol"]
    _require(protocol in PROTOCOLS,
             f"protocol must be one of {', '.join(PROTOCOLS)}")
    phi = float(cfg["phi"])
    _require(0.0 <= phi < 0.5, f"phi must be in [0, 0.5), got {phi}")
    m = int(cfg["m"])
    _require(m >= 1, "m must be at least 1")
    trials = int(cfg["trials"])
    _require(trials >= 1, "trials must be at least 1")
    transcripts = int(cfg["transcripts"])
    _require(0 <= transcripts, "transcripts must be non-negative")
    slack = float(cfg["slack"])
    _require(slack >= 0.0, "slack must be non-negative")
    limit = int(cfg["enum_limit"])
    outerish = protocol in ("p1", "p1prime", "p2", "p2prime")
    primed = protocol.endswith("prime")

    # secret alphabet
    if protocol in ("p0", "p0q"):
        _require(cfg["outer_code"] is None,
                 f"outer_code does not apply to {protocol}")
        if protocol == "p0":
            q = 2 if cfg["q"] is None else int(cfg["q"])
            _require(q == 2, "p0 is a 1-of-2 transfer; q must be 2")
        else:
            q = 2 if cfg["q"] is None else int(cfg["q"])
            _require(q >= 2, "p0q needs q >= 2")
        degree = 1
    elif protocol in ("p1", "p1prime"):
        q = 2 if cfg["q"] is None else int(cfg["q"])
        _require(q == 2, "the binary string protocols fix q = 2")
        degree = 1
    else:
        if cfg["outer_code"] is not None:
            degree = int(cfg["outer_code"].get("field_degree", 1))
            q = 1 << degree
            _require(cfg["q"] in (None, q),
                     f"outer code lives over a {q}-symbol field; q={cfg['q']} "
                     "disagrees")
        else:
            q = 4 if cfg["q"] is None else int(cfg["q"])
            _require(q >= 4 and (q & (q - 1)) == 0,
                     "the q-ary protocols need q a power of two >= 4 "
                     "(use p1 for q = 2)")
            degree = q.bit_length() - 1

    # inner session code
    bits = m * degree if outerish else m
    inner_d = None
    if cfg["code"] is not None:
        code, embedded = code_from_json(cfg["code"])
        _require(code.field.degree == 1, "the inner code must be binary")
        n0 = code.length
        _require(cfg["n0"] in (None, n0),
                 f"inner code length {n0} disagrees with n0={cfg['n0']}")
        inner_d = embedded.d if embedded is not None else None
    else:
        n0 = DEFAULT_N0 if cfg["n0"] is None else int(cfg["n0"])
        _require(n0 >= 2, "n0 must be at least 2")
        _require(bits <= n0, f"secrets of {bits} bits do not fit n0={n0}")
        code, inner_d = _default_inner_code(n0, bits, limit,
                                            derive_rng(seed, 1))
    inner = P0Params(block_len=n0, channel=BscParams(phi), code=code,
                     secret_bits=bits,
                     security_slack=slack if slack > 0 else None)

    # outer structure
    outer = None
    margin = None
    n_resolved = cfg["n"]
    if outerish:
        field = GF(degree)
        if cfg["outer_code"] is not None:
            base, _ = code_from_json(cfg["outer_code"])
            _require(base.field.degree == degree,
                     "outer code field does not match the protocol field")
            try:
                basis, punctured = orthonormalize(base)
            except ValueError as exc:
                raise ConfigError(
                    f"outer code cannot be orthonormalized: {exc}") from exc
            del punctured
            _require(cfg["n"] in (None, basis.length),
                     f"orthonormalized outer code runs {basis.length} rounds; "
                     f"n={cfg['n']} disagrees")
            n_resolved = basis.length
        elif primed:
            _require(cfg["n"] in (None, 8),
                     "the built-in compressed-variant code runs 8 rounds; "
                     "pass outer_code to change n")
            basis = _toy_compressed_basis(field)
            n_resolved = 8
        else:
            if cfg["n"] is None:
                n_resolved = n0 * n0
                if n_resolved % 2 == 0:
                    n_resolved -= 1
            else:
                n_resolved = int(cfg["n"])
                _require(n_resolved >= 1, "n must be at least 1")
                _require(n_resolved % 2 == 1,
                         "the built-in outer basis is the all-ones row, "
                         "which is orthonormal only at odd n; pass "
                         "outer_code for even lengths")
            basis = OrthonormalCode(Matrix(field, ((1,) * n_resolved,)))
        if primed:
            margin = DEFAULT_DELTA if cfg["delta"] is None else float(cfg["delta"])
            try:
                compressed_length(basis.dimension, margin)
            except ValueError as exc:
                raise ConfigError(
                    f"{exc}; with the default 8-round outer code use "
                    "delta = 0.25") from exc
        outer = OuterParams(basis=basis, inner=inner, block_syms=m,
                            margin=margin)
        sessions = n_resolved * (q - 1)
    elif protocol == "p0q":
        sessions = q - 1
    else:
        sessions = 1

    resolved = dict(cfg)
    resolved.update(protocol=protocol, phi=phi, n0=n0, n=n_resolved, m=m,
                    q=q, delta=margin if primed else cfg["delta"],
                    slack=slack, trials=trials, transcripts=transcripts)
    setup = RunSetup(protocol=protocol, inner=inner, outer=outer, q=q,
                     block_syms=m, compressed=primed,
                     sessions_per_trial=sessions, transcripts=transcripts,
                     inner_distance=inner_d)
    return resolved, setup


def _run_trial(setup: RunSetup, seed: int, trial: int) -> dict:
    rng = derive_rng(seed, 0, trial)
    keep_transcript = trial < setup.transcripts
    if setup.protocol == "p0":
        bits = setup.inner.secret_bits
        first = tuple(int(b) for b in rng.integers(0, 2, size=bits))
        second = tuple(int(b) for b in rng.integers(0, 2, size=bits))
        want_first = bool(rng.integers(0, 2))
        session = p0_run(first, second, want_first, setup.inner, rng)
        expected = first if want_first else second
        channel_bits = session.transcript.channel_bits
        transcript = session.transcript.to_json() if keep_transcript else None
        secret_bits = bits
    elif setup.protocol == "p0q":
        bits = setup.inner.secret_bits
        secrets = [tuple(int(b) for b in rng.integers(0, 2, size=bits))
                   for _ in range(setup.q)]
        index = int(rng.integers(setup.q))
        session = p0q_run(secrets, index, setup.inner, rng)
        expected = secrets[index]
        channel_bits = session.channel_bits
        transcript = ({"inner": [t.to_json() for t in session.transcripts]}
                      if keep_transcript else None)
        secret_bits = bits
    else:
        params = setup.outer
        field = params.field
        rows_n = (compressed_length(params.outer_dim, params.margin)
                  if setup.compressed else params.outer_dim)

        def draw() -> Matrix:
            return Matrix(field, tuple(
                tuple(int(a) for a in rng.integers(0, field.order,
                                                   size=setup.block_syms))
                for _ in range(rows_n)))

        first, second = draw(), draw()
        want_first = bool(rng.integers(0, 2))
        session = run_session(params, first, second, want_first, rng,
                              compressed=setup.compressed)
        expected = first if want_first else second
        channel_bits = session.transcript.channel_bits
        transcript = session.transcript.to_json() if keep_transcript else None
        secret_bits = rows_n * setup.block_syms * field.degree
    row = {
        "trial": trial,
        "status": session.status,
        "matched": bool(session.status == "ok" and session.output == expected),
        "channel_bits": int(channel_bits),
        "observed_rate": 2.0 * secret_bits / channel_bits,
    }
    if transcript is not None:
        row["transcript"] = transcript
    return row


_WORKER_CACHE: dict = {}


def _trial_chunk(payload: tuple) -> list[dict]:
    config_json, seed, lo, hi = payload
    key = (config_json, seed)
    setup = _WORKER_CACHE.get(key)
    if setup is None:
        _, setup = _normalize_run(json.loads(config_json), seed)
        _WORKER_CACHE[key] = setup
    return [_run_trial(setup, seed, t) for t in range(lo, hi)]


def _run_all_trials(resolved: dict, setup: RunSetup, seed: int,
                    workers: int) -> list[dict]:
    trials = resolved["trials"]
    if workers <= 1 or trials < 2 * workers:
        return [_run_trial(setup, seed, t) for t in range(trials)]
    config_json = json.dumps(resolved, sort_keys=True)
    base, extra = divmod(trials, workers)
    payloads = []
    lo = 0
    for i in range(workers):
        hi = lo + base + (1 if i < extra else 0)
        if hi > lo:
            payloads.append((config_json, seed, lo, hi))
        lo = hi
    rows: list[dict] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk in pool.map(_trial_chunk, payloads):
            rows.extend(chunk)
    return rows


def _binomial_ci(rate: float, trials: int) -> list[float]:
    half = 1.96 * math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)
    return [max(0.0, rate - half), min(1.0, rate + half)]


def cmd_run(config: dict, seed: int, workers: int = 1) -> dict:
    resolved, setup = _normalize_run(config, seed)
    rows = _run_all_trials(resolved, setup, seed, workers)
    trials = len(rows)
    success = sum(r["matched"] for r in rows) / trials
    aborts = sum(r["status"] == "abort" for r in rows) / trials
    failures = sum(r["status"] == "decode_failure" for r in rows) / trials
    ok_rates = [r["observed_rate"] for r in rows if r["status"] == "ok"]
    channel = BscParams(resolved["phi"])
    rule = detection_rule(setup.sessions_per_trial, setup.inner.block_len,
                          resolved["phi"], resolved["c"])
    derived = {
        "erasure_rate": channel.erasure_rate,
        "residual_error": channel.residual_error,
        "formula_rate": rate_p0(resolved["phi"]),
        "secret_bits_inner": setup.inner.secret_bits,
        "secret_cap": (p0_secret_length(setup.inner.block_len,
                                        resolved["phi"], resolved["slack"])
                       if resolved["slack"] > 0 else None),
        "sessions_per_trial": setup.sessions_per_trial,
        "eta": rule.eta,
        "threshold": rule.threshold,
        "false_accusation_bound": rule.false_accusation_bound,
        "inner_code": {"n": setup.inner.block_len,
                       "k": setup.inner.code.dimension,
                       "d": setup.inner_distance},
    }
    if setup.outer is not None:
        derived["outer"] = {
            "rounds": setup.outer.rounds,
            "dim": setup.outer.outer_dim,
            "field_order": setup.q,
            "compressed_len": (compressed_length(setup.outer.outer_dim,
                                                 setup.outer.margin)
                               if setup.compressed else None),
        }
    aggregates = {
        "trials": trials,
        "success_rate": success,
        "abort_rate": aborts,
        "decode_failure_rate": failures,
        "ci_95": _binomial_ci(success, trials),
        "mean_observed_rate": (sum(ok_rates) / len(ok_rates)
                               if ok_rates else None),
        "mean_channel_bits": sum(r["channel_bits"] for r in rows) / trials,
    }
    return build_report("run", resolved, seed, derived, aggregates,
                        trials=rows)


# -- attack subcommand -------------------------------------------------------

def _parse_grid(raw: Optional[str], n: int, slots: int) -> list[int]:
    if raw:
        try:
            grid = [int(part) for part in raw.split(",") if part.strip()]
        except ValueError as exc:
            raise ConfigError(
                f"sweep_grid expects comma-separated integers, got {raw!r}"
            ) from exc
    else:
        grid = [0, n // 4, n // 2, n]
    grid = sorted(set(grid))
    _require(len(grid) >= 2, "sweep_grid needs at least two distinct points")
    for point in grid:
        _require(0 <= point <= slots,
                 f"sweep point {point} outside 0..{slots}")
    return grid


def _normalize_attack(config: dict) -> dict:
    cfg = _take(config, "attack")
    strategy = cfg["strategy"]
    _require(strategy in STRATEGIES,
             f"strategy must be one of {', '.join(STRATEGIES)}")
    phi = float(cfg["phi"])
    _require(0.0 <= phi < 0.5, f"phi must be in [0, 0.5), got {phi}")
    n0 = int(cfg["n0"])
    _require(n0 >= 2, "n0 must be at least 2")
    n = n0 * n0 if cfg["n"] is None else int(cfg["n"])
    _require(n >= 1, "n must be at least 1")
    trials = int(cfg["trials"])
    _require(trials >= 1, "trials must be at least 1")
    slots = 2 * n * n0
    if strategy == "honest":
        _require(cfg["corrupted"] in (None, 0),
                 "honest strategy fixes corrupted = 0")
        corrupted = 0
    elif strategy == "tracker":
        corrupted = n if cfg["corrupted"] is None else int(cfg["corrupted"])
        _require(0 <= corrupted <= slots,
                 f"corrupted must be in 0..{slots} (2 n n0 slots)")
    else:
        _require(cfg["corrupted"] in (None, 0),
                 "the request-mask audit does not corrupt pairs; drop "
                 "corrupted")
        corrupted = 0
    if cfg["sweep"]:
        _require(strategy == "tracker", "sweep applies to the tracker only")
    delta = cfg["delta"]
    if strategy == "bob":
        delta = 0.25 if delta is None else float(delta)
    resolved = dict(cfg)
    resolved.update(strategy=strategy, phi=phi, n0=n0, n=n,
                    corrupted=corrupted, trials=trials, delta=delta)
    return resolved


def _attack_basis(cfg: dict) -> OrthonormalCode:
    if cfg["outer_code"] is not None:
        base, _ = code_from_json(cfg["outer_code"])
        _require(base.field.degree == 1,
                 "the request-mask audit is binary; supply a binary code")
        try:
            basis, _ = orthonormalize(base)
        except ValueError as exc:
            raise ConfigError(
                f"outer code cannot be orthonormalized: {exc}") from exc
        return basis
    return _toy_compressed_basis(GF(1))


def cmd_attack(config: dict, seed: int) -> dict:
    cfg = _normalize_attack(config)
    strategy = cfg["strategy"]
    phi, n0, n, c = cfg["phi"], cfg["n0"], cfg["n"], cfg["c"]
    trials = cfg["trials"]
    derived: dict = {"erasure_rate": BscParams(phi).erasure_rate}
    trials_rows = None

    if strategy in ("honest", "tracker"):
        rule = detection_rule(n, n0, phi, c)
        corrupted = cfg["corrupted"]
        derived.update({
            "eta": rule.eta,
            "threshold": rule.threshold,
            "false_accusation_bound": rule.false_accusation_bound,
            "expected_unerased_honest": expected_unerased(n, n0, phi, 0),
            "expected_unerased": expected_unerased(n, n0, phi, corrupted),
        })
        campaign = detection_campaign(n, n0, phi, corrupted, trials,
                                      derive_rng(seed, 2), c)
        derived["campaign"] = {
            "mean_unerased": campaign.mean_unerased,
            "expected_mean": campaign.expected_mean,
        }
        if strategy == "tracker":
            per_session = min(2 * n0, (corrupted + n // 2) // n)
            derived["per_session_corrupt"] = per_session
            adv = tracker_advantage_p0(n0, phi, per_session, trials,
                                       derive_rng(seed, 3))
            advantage = adv.advantage
            derived["advantage_std_error"] = adv.std_error
            derived["tie_rate"] = adv.tie_rate
        else:
            advantage = 0.0
        if cfg["sweep"]:
            grid = _parse_grid(cfg["sweep_grid"], n, rule.slots)
            sweep_rng = derive_rng(seed, 4)
            rows, rates, means = [], [], []
            for point in grid:
                rep = detection_campaign(n, n0, phi, point, trials,
                                         sweep_rng, c)
                rows.append([float(point), rep.accusation_rate,
                             rep.ci_95[0], rep.ci_95[1]])
                rates.append(rep.accusation_rate)
                means.append(rep.mean_unerased)
            slope = float(np.polyfit([float(g) for g in grid], means, 1)[0])
            derived["sweep"] = {
                "grid": grid,
                "accusation_rates": rates,
                "mean_unerased": means,
                "slope": slope,
                "expected_slope": -(1.0 - 2.0 * BscParams(phi).erasure_rate),
                "rows": rows,
            }
        aggregates = {
            "params": {"phi": phi, "n0": n0, "n": n, "c": c,
                       "corrupted": corrupted, "eta": rule.eta,
                       "threshold": rule.threshold},
            "strategy": strategy,
            "trials": trials,
            "accusation_rate": campaign.accusation_rate,
            "advantage": advantage,
            "posterior_entropies": None,
            "rank_V_histogram": None,
            "ci_95": list(campaign.ci_95),
        }
    else:
        basis = _attack_basis(cfg)
        if basis.length > 16 or basis.dimension > 14:
            raise EnumerationLimit(
                f"request-mask audit enumerates 2^{basis.length} masks over "
                f"a 2^{basis.dimension} posterior; supply a smaller code")
        margin = cfg["delta"]
        try:
            u_len = compressed_length(basis.dimension, margin)
        except ValueError as exc:
            raise ConfigError(
                f"{exc}; with the default 8-round outer code use "
                "delta = 0.25") from exc
        audit = audit_bob_strategies(basis, margin,
                                     pair_samples=cfg["pair_samples"],
                                     rng=derive_rng(seed, 5))
        trials_rows = [{
            "mask": "".join(str(b) for b in cell.mask),
            "rank_V": cell.rank_v,
            "rank_U": cell.rank_u,
            "mean_entropy_first": cell.mean_first,
            "mean_entropy_second": cell.mean_second,
            "predicted_side": cell.predicted_side(audit.outer_dim),
            "predicted_entropy": cell.predicted_entropy(audit.outer_dim),
        } for cell in audit.cells]
        derived.update({
            "outer_len": basis.length,
            "outer_dim": audit.outer_dim,
            "compressed_len": audit.compressed_len,
            "margin": audit.margin,
        })
        aggregates = {
            "params": {"phi": phi, "outer_len": basis.length,
                       "outer_dim": audit.outer_dim, "delta": margin,
                       "compressed_len": u_len},
            "strategy": strategy,
            "trials": len(audit.cells),
            "accusation_rate": None,
            "advantage": audit.slack_bits,
            "posterior_entropies": {
                "worst_predicted_bits": audit.worst_predicted,
                "full_bits": float(audit.compressed_len),
                "slack_bits": audit.slack_bits,
                "prediction_mismatches": audit.prediction_mismatches,
            },
            "rank_V_histogram": {str(k): v
                                 for k, v in sorted(audit.rank_histogram.items())},
            "ci_95": None,
        }
    return build_report("attack", cfg, seed, derived, aggregates,
                        trials=trials_rows)


# -- rates subcommand --------------------------------------------------------

def cmd_rates(config: dict, seed: int) -> dict:
    cfg = _take(config, "rates")
    phi = cfg["phi"]
    if phi is not None:
        phi = float(phi)
        _require(0.0 < phi < 0.5, f"phi must be in (0, 0.5), got {phi}")
    if cfg["code_rate"] is not None:
        rate = float(cfg["code_rate"])
        q = 2 if cfg["q"] is None else int(cfg["q"])
        chains = [(rate, q)]
    else:
        _require(cfg["q"] is None, "q only applies together with code_rate")
        chains = [(1.0 / 1575.0, 2), (1.0 / 9.0, 16)]
    phi_star, rate_star = optimize_rate_p0()
    used_phi = phi_star if phi is None else phi
    channel = BscParams(used_phi)
    derived = {
        "phi": used_phi,
        "phi_star": phi_star,
        "rate_star": rate_star,
        "erasure_rate": channel.erasure_rate,
        "residual_error": channel.residual_error,
        "inner_rate": rate_p0(used_phi),
    }
    table = []
    for code_rate, q in chains:
        breakdown = rate_chain(code_rate, q, phi=phi)
        table.append(breakdown.to_json())
    if cfg["curve"]:
        points = int(cfg["curve_points"])
        _require(points >= 2, "curve_points must be at least 2")
        phis = [float(x) for x in np.linspace(0.005, 0.495, points)]
        rows = [[p, r, r, r] for p, _, r in rate_curve(phis)]
        derived["curve"] = {
            "points": points,
            "erasure_rates": [e for _, e, _ in rate_curve(phis)],
            "rows": rows,
        }
    aggregates = {
        "optimum": {"phi": phi_star, "rate": rate_star},
        "table": table,
    }
    resolved = dict(cfg)
    resolved["phi"] = phi
    return build_report("rates", resolved, seed, derived, aggregates)


# -- code-audit subcommand ---------------------------------------------------

def cmd_code_audit(config: dict, seed: int) -> dict:
    cfg = _take(config, "code-audit")
    _require(cfg["code"] is not None, "code-audit needs --code FILE")
    limit = int(cfg["enum_limit"])
    try:
        code, embedded = code_from_json(cfg["code"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad code file: {exc}") from exc
    audit = code.audit(limit)
    try:
        _, punctured = orthonormalize(code)
        punctures: Optional[list[int]] = [int(i) for i in punctured]
    except ValueError:
        punctures = None
    matches = None
    if embedded is not None:
        matches = (embedded.d == audit.d and embedded.d_hat == audit.d_hat
                   and embedded.square_dim == audit.square_dim)
    aggregates = {
        "n": code.length,
        "k": code.dimension,
        "field_degree": code.field.degree,
        "d": audit.d,
        "d_hat": audit.d_hat,
        "square_dim": audit.square_dim,
        "square_dual_dim": code.length - audit.square_dim,
        "orthonormal_guaranteed": audit.d > code.dimension,
        "orthonormalized": punctures is not None,
        "punctures": punctures,
        "usable_outer": audit.square_dim < code.length,
        "matches_embedded_audit": matches,
    }
    derived = {
        "enum_limit": limit,
        "codewords": code.field.order ** code.dimension,
    }
    return build_report("code-audit", cfg, seed, derived, aggregates)


# -- replay ------------------------------------------------------------------

_DISPATCH = {
    "run": cmd_run,
    "attack": cmd_attack,
    "rates": cmd_rates,
    "code-audit": cmd_code_audit,
}


def _do_replay(args: argparse.Namespace) -> int:
    try:
        text = Path(args.report).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read report {args.report}: {exc}") from exc
    try:
        stored = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.report} is not JSON: {exc}") from exc
    try:
        from .reports import validate_report
        validate_report(stored)
    except jsonschema.ValidationError as exc:
        raise ConfigError(
            f"{args.report} is not a valid report: {exc.message}") from exc
    command = stored["command"]
    if command not in _DISPATCH:
        raise ConfigError(f"cannot replay a {command} report")
    fresh = _DISPATCH[command](stored["config"], stored["seed"])
    if args.out:
        write_report(args.out, fresh)
    if canonical_json(fresh) == canonical_json(stored):
        print(f"replay: {args.report} reproduced exactly "
              f"({command}, seed {stored['seed']})")
        return EXIT_OK
    parts = [k for k in ("version", "config", "derived", "aggregates",
                         "trials")
             if canonical_json(fresh.get(k)) != canonical_json(stored.get(k))]
    message = (f"replay: MISMATCH against {args.report} "
               f"(differs in: {', '.join(parts) or 'unknown'})")
    if fresh["version"] != stored.get("version"):
        message += (f"; report written by version {stored.get('version')}, "
                    f"this package is {fresh['version']}")
    print(message, file=sys.stderr)
    return 1


# -- argument parsing and dispatch -------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otlab",
        description="Oblivious-transfer protocol workbench over simulated "
                    "noisy channels.")
    parser.add_argument("--version", action="version",
                        version=f"otlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", metavar="FILE",
                        help="flat `key = value` config file")
        sp.add_argument("--seed", type=int, metavar="N",
                        help=f"master seed (default ${ENV_SEED}, then 0)")
        sp.add_argument("--out", metavar="FILE",
                        help="write the JSON report here instead of stdout")

    run = sub.add_parser("run", help="simulate honest protocol sessions")
    common(run)
    run.add_argument("--protocol", choices=PROTOCOLS)
    run.add_argument("--phi", type=float, help="channel crossover")
    run.add_argument("--n0", type=int, help="inner block length")
    run.add_argument("--n", type=int, help="outer rounds")
    run.add_argument("--m", type=int,
                     help="secret bits (p0/p0q) or symbols per round")
    run.add_argument("--q", type=int,
                     help="secret count (p0q) or outer field order (p2)")
    run.add_argument("--delta", type=float,
                     help="compression margin for the primed variants")
    run.add_argument("--c", type=float, help="detection threshold constant")
    run.add_argument("--slack", type=float,
                     help="privacy-amplification sizing margin (0 = off)")
    run.add_argument("--trials", type=int)
    run.add_argument("--transcripts", type=int, metavar="N",
                     help="embed full transcripts for the first N trials")
    run.add_argument("--code", metavar="FILE", help="inner code JSON")
    run.add_argument("--outer-code", metavar="FILE", dest="outer_code",
                     help="outer code JSON (orthonormalized on load)")
    run.add_argument("--enum-limit", type=int, dest="enum_limit")
    run.add_argument("--workers", type=int, default=1,
                     help="trial-level process parallelism")

    attack = sub.add_parser("attack", help="adversary campaigns")
    common(attack)
    attack.add_argument("--strategy", choices=STRATEGIES)
    attack.add_argument("--phi", type=float)
    attack.add_argument("--n0", type=int)
    attack.add_argument("--n", type=int, help="sessions per campaign")
    attack.add_argument("--corrupted", type=int, metavar="M",
                        help="false pairs per campaign (tracker)")
    attack.add_argument("--c", type=float)
    attack.add_argument("--trials", type=int)
    attack.add_argument("--delta", type=float,
                        help="compression margin for the mask audit")
    attack.add_argument("--pair-samples", type=int, dest="pair_samples",
                        help="sample this many compression pairs per mask")
    attack.add_argument("--outer-code", metavar="FILE", dest="outer_code")
    attack.add_argument("--sweep", metavar="FILE", dest="sweep_out",
                        help="sweep corruption counts; CSV goes here")
    attack.add_argument("--sweep-grid", dest="sweep_grid", metavar="A,B,...",
                        help="corruption counts for the sweep")
    attack.add_argument("--enum-limit", type=int, dest="enum_limit")

    rates = sub.add_parser("rates", help="achievable-rate table")
    common(rates)
    rates.add_argument("--phi", type=float,
                       help="evaluate at this crossover (default: optimum)")
    rates.add_argument("--code-rate", type=float, dest="code_rate",
                       help="outer code rate for a single chain row")
    rates.add_argument("--q", type=int, help="outer field order for the chain")
    rates.add_argument("--curve", metavar="FILE", dest="curve_out",
                       help="write the rate-vs-crossover CSV here")
    rates.add_argument("--curve-points", type=int, dest="curve_points")

    audit = sub.add_parser("code-audit", help="distances and square structure")
    common(audit)
    audit.add_argument("--code", metavar="FILE", help="code JSON to audit")
    audit.add_argument("--enum-limit", type=int, dest="enum_limit")
    audit.add_argument("--out-code", metavar="FILE", dest="out_code",
                       help="write the code back with the audit embedded")

    replay = sub.add_parser("replay", help="re-run a report and compare")
    replay.add_argument("report", help="report JSON to reproduce")
    replay.add_argument("--out", metavar="FILE",
                        help="write the freshly computed report here")
    return parser


def _flags_to_config(args: argparse.Namespace) -> dict:
    out = {}
    for key in _COMMAND_KEYS[args.command]:
        if key in ("sweep", "curve"):
            continue
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "sweep_out", None):
        out["sweep"] = True
    if getattr(args, "curve_out", None):
        out["curve"] = True
    return out


def _summary_line(report: dict) -> str:
    command = report["command"]
    agg = report["aggregates"]
    if command == "run":
        return (f"run {report['config']['protocol']}: trials={agg['trials']} "
                f"success={agg['success_rate']:.4f} "
                f"abort={agg['abort_rate']:.4f} "
                f"decode_failure={agg['decode_failure_rate']:.4f}")
    if command == "attack":
        if agg["strategy"] == "bob":
            ent = agg["posterior_entropies"]
            return (f"attack bob: masks={agg['trials']} "
                    f"worst_predicted={ent['worst_predicted_bits']:.4f} of "
                    f"{ent['full_bits']:.0f} bits, "
                    f"mismatches={ent['prediction_mismatches']}")
        return (f"attack {agg['strategy']}: trials={agg['trials']} "
                f"accusation_rate={agg['accusation_rate']:.4f} "
                f"advantage={agg['advantage']:.4f}")
    if command == "rates":
        opt = agg["optimum"]
        cells = ", ".join(
            f"R(q={row['q']})={row['outer_rate']:.3e}/{row['private_rate']:.3e}"
            for row in agg["table"])
        return (f"rates: phi*={opt['phi']:.4f} R0*={opt['rate']:.4f}; "
                f"{cells}")
    if command == "code-audit":
        return (f"code-audit [{agg['n']},{agg['k']}]: d={agg['d']} "
                f"d_hat={agg['d_hat']} square_dim={agg['square_dim']} "
                f"usable={agg['usable_outer']}")
    return command


def _emit_outputs(args: argparse.Namespace, report: dict) -> None:
    if getattr(args, "out", None):
        write_report(args.out, report)
        print(_summary_line(report))
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(canonical_json(report))
    if getattr(args, "sweep_out", None):
        write_csv(args.sweep_out, report["derived"]["sweep"]["rows"])
        print(f"wrote {args.sweep_out}", file=sys.stderr)
    if getattr(args, "curve_out", None):
        write_csv(args.curve_out, report["derived"]["curve"]["rows"])
        print(f"wrote {args.curve_out}", file=sys.stderr)
    if getattr(args, "out_code", None):
        agg = report["aggregates"]
        obj = dict(report["config"]["code"])
        obj["audit"] = {"d": agg["d"], "d_hat": agg["d_hat"],
                        "square_dim": agg["square_dim"]}
        Path(args.out_code).write_text(
            json.dumps(obj, indent=2, sort_keys=True) + "\n")
        print(f"wrote {args.out_code}", file=sys.stderr)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            return _do_replay(args)
        file_cfg = parse_config_file(args.config) if args.config else {}
        config, file_seed = resolve_config(args.command, file_cfg,
                                           _flags_to_config(args))
        seed = resolve_seed(args.seed, file_seed)
        if args.command == "run":
            report = cmd_run(config, seed, workers=max(1, args.workers))
        else:
            report = _DISPATCH[args.command](config, seed)
    except ConfigError as exc:
        print(f"otlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationLimit as exc:
        print(f"otlab: enumeration limit: {exc}", file=sys.stderr)
        return EXIT_ENUM
    except ValueError as exc:
        print(f"otlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit_outputs(args, report)
    if (args.command == "run"
            and report["aggregates"]["abort_rate"] >= 0.5):
        print("otlab: aborts dominated the run; see the report",
              file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
