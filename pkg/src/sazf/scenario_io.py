"""Scenario files (TOML), CSV results, run manifests and text summaries.

A scenario file is flat TOML; every key is optional::

    users = 3
    relay_antennas = 200
    theta_br = 5
    power_bs_dbm = 10      # or power_bs_mw for an exact linear value
    power_rs_dbm = 20
    power_user_dbm = 0
    noise_dbm = -20
    pathloss_bs = 1.0
    pathloss_user = 0.125
    policy = "fixed"       # or a list: ["fixed", "case1", "case2"]
    trials = 200
    seed = 20150101

    [sweep]
    axis = "theta_br"      # theta_br | relay_antennas | users
    values = [2, 3, 4, 5]
"""

import datetime as _dt
import io
import json
import re
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from . import __version__
from .asymptotics import asymptotic_snrs, cutset_high_snr, energy_efficiency, sum_spectral_efficiency
from .channel import NetworkConfig, NormalizationMode, PowerPolicy, dbm_to_mw
from .errors import InvalidConfig, ParseError, ValidationError
from .experiments import Scenario, SeriesKind, SweepAxis, config_at

__all__ = [
    "DEFAULT_SEED",
    "DEFAULT_TRIALS",
    "parse_scenario",
    "parse_scenario_text",
    "scenario_to_dict",
    "scenario_to_toml",
    "format_csv",
    "emit_csv",
    "emit_summary",
    "write_manifest",
    "figure_scenarios",
]

DEFAULT_SEED = 20150101
DEFAULT_TRIALS = 200
DEVIATION_FLAG = 0.05

# (file key, config field, kind); kind "dbm" keys also accept a "_mw" twin
_POWER_KEYS = [
    ("power_bs", "E_B"),
    ("power_rs", "E_R"),
    ("power_user", "E_U"),
    ("noise", "sigma2"),
]
_SCALAR_KEYS = {
    "users": ("K", int),
    "relay_antennas": ("N_R", int),
    "theta_br": ("theta_BR", float),
    "pathloss_bs": ("ell_B", float),
    "pathloss_user": ("ell_U", float),
    "condition_threshold": ("condition_threshold", float),
}
_TOP_KEYS = (set(_SCALAR_KEYS) | {k + "_dbm" for k, _ in _POWER_KEYS}
             | {k + "_mw" for k, _ in _POWER_KEYS}
             | {"policy", "normalization", "series", "trials", "seed", "sweep"})
_SWEEP_KEYS = {"axis", "values"}


def _line_of(text, key):
    leaf = key.split(".")[-1]
    for number, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*(sweep\.)?{re.escape(leaf)}\s*=", line):
            return number
    return None


def _number(value, key, text, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", key=key, line=_line_of(text, key))
    if kind is int:
        if float(value) != int(value):
            raise ParseError(f"expected an integer, got {value!r}", key=key, line=_line_of(text, key))
        return int(value)
    return float(value)


def parse_scenario_text(text):
    """Build a validated `Scenario` from scenario-file text."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(f"malformed scenario file: {exc}",
                         line=int(m.group(1)) if m else None) from exc

    for key in doc:
        if key not in _TOP_KEYS:
            raise ParseError("unknown key", key=key, line=_line_of(text, key))
    sweep_doc = doc.get("sweep", {})
    if not isinstance(sweep_doc, dict):
        raise ParseError("expected a table", key="sweep", line=_line_of(text, "sweep"))
    for key in sweep_doc:
        if key not in _SWEEP_KEYS:
            raise ParseError("unknown key", key=f"sweep.{key}", line=_line_of(text, key))

    fields = {}
    for key, (name, kind) in _SCALAR_KEYS.items():
        if key in doc:
            fields[name] = _number(doc[key], key, text, kind)
    for stem, name in _POWER_KEYS:
        dbm, mw = stem + "_dbm", stem + "_mw"
        if dbm in doc and mw in doc:
            raise ParseError(f"give only one of {dbm} and {mw}", key=dbm, line=_line_of(text, mw))
        if dbm in doc:
            fields[name] = dbm_to_mw(_number(doc[dbm], dbm, text))
        elif mw in doc:
            fields[name] = _number(doc[mw], mw, text)

    try:
        policy_raw = doc.get("policy", "fixed")
        policies = [policy_raw] if isinstance(policy_raw, str) else list(policy_raw)
        policies = tuple(PowerPolicy.parse(p) for p in policies)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), key="policy", line=_line_of(text, "policy")) from exc
    try:
        if "normalization" in doc:
            fields["normalization_mode"] = NormalizationMode.parse(doc["normalization"])
    except ValueError as exc:
        raise ParseError(str(exc), key="normalization", line=_line_of(text, "normalization")) from exc
    try:
        series = frozenset(SeriesKind.parse(s) for s in doc.get("series", [s.value for s in SeriesKind]))
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), key="series", line=_line_of(text, "series")) from exc
    try:
        axis = SweepAxis.parse(sweep_doc.get("axis", "theta_br"))
    except ValueError as exc:
        raise ParseError(str(exc), key="sweep.axis", line=_line_of(text, "axis")) from exc

    trials = _number(doc.get("trials", DEFAULT_TRIALS), "trials", text, int)
    seed = _number(doc.get("seed", DEFAULT_SEED), "seed", text, int)

    try:
        fields["power_policy"] = policies[0] if policies else PowerPolicy.FIXED
        base = NetworkConfig(**fields)
        if "values" in sweep_doc:
            raw = sweep_doc["values"]
            if not isinstance(raw, list):
                raise ParseError("expected a list", key="sweep.values", line=_line_of(text, "values"))
            kind = float if axis is SweepAxis.THETA_BR else int
            values = tuple(_number(v, "sweep.values", text, kind) for v in raw)
        else:
            values = (getattr(base, axis.field_name),)
        return Scenario(base=base, sweep_axis=axis, axis_values=values, trials=trials,
                        master_seed=seed, series=series, policies=policies)
    except InvalidConfig as exc:
        raise ValidationError(str(exc)) from exc


def parse_scenario(path):
    path = Path(path)
    return parse_scenario_text(path.read_text(encoding="utf-8"))


def scenario_to_dict(scenario):
    """Scenario echo. Powers are written in mW so that parsing the echo
    gives back an identical scenario (a dBm round trip is not exact)."""
    b = scenario.base
    return {
        "users": b.K,
        "relay_antennas": b.N_R,
        "theta_br": float(b.theta_BR),
        "power_bs_mw": b.E_B,
        "power_rs_mw": b.E_R,
        "power_user_mw": b.E_U,
        "noise_mw": b.sigma2,
        "pathloss_bs": b.ell_B,
        "pathloss_user": b.ell_U,
        "condition_threshold": b.condition_threshold,
        "normalization": b.normalization_mode.value,
        "policy": [p.value for p in scenario.policies],
        "series": sorted(s.value for s in scenario.series),
        "trials": scenario.trials,
        "seed": scenario.master_seed,
        "sweep": {
            "axis": scenario.sweep_axis.value,
            "values": list(scenario.axis_values),
        },
    }


def scenario_to_toml(scenario):
    return tomli_w.dumps(scenario_to_dict(scenario))


def _g(x):
    return format(float(x), ".9g")


def format_csv(result):
    """CSV text: one row per (axis point, series, policy), sorted by axis
    value, then series name, then policy label."""
    rows = []
    for (kind, policy), stats in result.entries.items():
        for value, stat in zip(result.axis_values, stats):
            rows.append((float(value), kind.value, policy.label, stat))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    out = io.StringIO()
    out.write("axis,series,policy,mean_bpshz,stderr,trials\n")
    for value, series, policy, stat in rows:
        out.write(f"{_g(value)},{series},{policy},{_g(stat.mean)},{_g(stat.stderr)},{stat.trials}\n")
    return out.getvalue()


def emit_csv(result, path):
    Path(path).write_text(format_csv(result), encoding="utf-8", newline="")


def emit_summary(result, config=None):
    """Human-readable table: sum rate (Monte Carlo and closed form), cut-set
    bound, per-user gap and energy efficiency for each point and policy.

    Lines whose Monte Carlo mean deviates from the closed form by more than
    5% end with ``<< deviates``.
    """
    base = config if config is not None else result.scenario.base
    axis = SweepAxis(result.axis)
    header = (f"{axis.value:>14} {'policy':>7} {'R_sum MC':>10} {'R_sum CF':>10} "
              f"{'cut-set':>10} {'gap/user':>9} {'EE':>10}")
    lines = [header]
    policies = sorted({p for _, p in result.entries}, key=lambda p: p.label)
    for i, value in enumerate(result.axis_values):
        for policy in policies:
            def get(kind):
                stats = result.entries.get((kind, policy))
                return None if stats is None else stats[i].mean

            cfg = config_at(base, axis, value, policy)
            closed = get(SeriesKind.CLOSED_FORM)
            if closed is None:
                closed = sum_spectral_efficiency(asymptotic_snrs(cfg))
            cutset = get(SeriesKind.CUTSET_HIGH_SNR)
            if cutset is None:
                cutset = cutset_high_snr(cfg)
            ee = get(SeriesKind.ENERGY_EFFICIENCY)
            if ee is None:
                ee = energy_efficiency(closed, cfg)
            mc = get(SeriesKind.MONTE_CARLO)
            mc_text = "-" if mc is None else f"{mc:.4f}"
            line = (f"{value:>14g} {policy.label:>7} {mc_text:>10} {closed:>10.4f} "
                    f"{cutset:>10.4f} {(cutset - closed) / cfg.K:>9.4f} {ee:>10.6f}")
            if mc is not None and closed > 0 and abs(mc - closed) / closed > DEVIATION_FLAG:
                line += "  << deviates"
            lines.append(line)
    return "\n".join(lines) + "\n"


def write_manifest(path, scenario, outputs, started, finished=None):
    """Structured (JSON) record tying output files to the scenario."""
    finished = finished or _dt.datetime.now(_dt.timezone.utc)
    manifest = {
        "tool": "sazf",
        "version": __version__,
        "scenario": scenario_to_dict(scenario) if scenario is not None else None,
        "master_seed": scenario.master_seed if scenario is not None else None,
        "started": started.isoformat(),
        "finished": finished.isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def figure_scenarios(trials=DEFAULT_TRIALS, seed=DEFAULT_SEED):
    """Ready-made scenarios for the four numerical-results figures."""
    all_policies = (PowerPolicy.FIXED, PowerPolicy.CASE_I, PowerPolicy.CASE_II)
    rate_series = frozenset({SeriesKind.MONTE_CARLO, SeriesKind.CLOSED_FORM,
                             SeriesKind.CUTSET_EXACT, SeriesKind.CUTSET_HIGH_SNR})
    return {
        "fig2": Scenario(NetworkConfig(K=3, N_R=200, theta_BR=5.0), SweepAxis.THETA_BR,
                         (2.0, 3.0, 4.0, 5.0), trials, seed, rate_series, (PowerPolicy.FIXED,)),
        "fig3": Scenario(NetworkConfig(K=3, N_R=200, theta_BR=10.0), SweepAxis.N_R,
                         tuple(range(50, 301, 50)), trials, seed, rate_series, all_policies),
        "fig4": Scenario(NetworkConfig(K=10, N_R=200, theta_BR=10.0), SweepAxis.K,
                         tuple(range(10, 81, 10)), trials, seed,
                         frozenset({SeriesKind.MONTE_CARLO, SeriesKind.CLOSED_FORM}), all_policies),
        "fig5": Scenario(NetworkConfig(K=10, N_R=200, theta_BR=10.0), SweepAxis.K,
                         tuple(range(10, 81, 5)), trials, seed,
                         frozenset({SeriesKind.ENERGY_EFFICIENCY}), all_policies),
    }
