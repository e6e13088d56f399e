"""Declarative parameter sweeps and their CSV rendering.

A sweep file is ``key = value`` lines; ``#`` starts a comment::

    parameter = kappa          # a | c | kappa
    values = 0.1:10:0.1        # start:stop:step (inclusive) or a comma list
    a = 0.2
    c = 1.5
    kw = 1
    series = c: 1.5, 2, 3      # optional: one curve per value of another field
    outputs = feedback, nonfeedback, butman, kappa_min
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .arma_model import ChannelSpec
from .capacity import (
    Region,
    butman_rate,
    feedback_capacity,
    kappa_min,
    nonfeedback_lower_bound,
    regime_classify,
)
from .errors import InvalidParams

__all__ = ["SweepSpec", "parse_sweep", "load_sweep", "sweep_rows", "render_csv", "CSV_COLUMNS", "SCHEMA"]

SCHEMA = 1
SWEEPABLE = ("a", "c", "kappa")
OUTPUTS = ("feedback", "nonfeedback", "butman", "kappa_min")
FIELDS = {"a": "a", "c": "c", "kw": "k_w", "k_w": "k_w", "kappa": "kappa", "s1": "s1"}
CSV_COLUMNS = [
    "series", "series_value", "parameter", "value", "a", "c", "kw", "kappa", "output",
    "regime", "rate_nats", "rate_bits", "kappa_min", "k_inf", "lambda", "k_z",
]
LN2 = math.log(2.0)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    fixed: dict
    outputs: tuple = ("feedback", "nonfeedback")
    series: str | None = None
    series_values: tuple = (None,)

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise InvalidParams(f"parameter must be one of {SWEEPABLE}")
        if not self.values:
            raise InvalidParams("values must be nonempty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise InvalidParams("values must be strictly increasing")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad or not self.outputs:
            raise InvalidParams(f"unknown outputs {sorted(bad)}")
        if self.series is not None and (self.series == self.parameter or self.series not in FIELDS.values()):
            raise InvalidParams(f"bad series field {self.series!r}")


def _grid(text):
    text = text.strip()
    if ":" in text and "," not in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0 or stop < start:
            raise InvalidParams(f"bad range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(round(start + i * step, 12)) for i in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


def parse_sweep(text):
    """Parse sweep-file text into a :class:`SweepSpec`."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParams(f"line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if key in entries:
            raise InvalidParams(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    try:
        parameter = entries.pop("parameter")
        values = _grid(entries.pop("values"))
    except KeyError as exc:
        raise InvalidParams(f"missing required key {exc}") from None
    except ValueError as exc:
        raise InvalidParams(str(exc)) from None
    outputs = tuple(o.strip() for o in entries.pop("outputs", "feedback, nonfeedback").split(",") if o.strip())
    series, series_values = None, (None,)
    if "series" in entries:
        name, _, vals = entries.pop("series").partition(":")
        series = FIELDS.get(name.strip())
        if series is None:
            raise InvalidParams(f"unknown series field {name.strip()!r}")
        try:
            series_values = _grid(vals)
        except ValueError as exc:
            raise InvalidParams(str(exc)) from None
        if not series_values:
            raise InvalidParams("series needs at least one value")
    fixed = {"k_w": 1.0, "kappa": 1.0, "s1": 0.0}
    for key, value in entries.items():
        if key not in FIELDS:
            raise InvalidParams(f"unknown key {key!r}")
        try:
            fixed[FIELDS[key]] = float(value)
        except ValueError:
            raise InvalidParams(f"{key}: not a number: {value!r}") from None
    parameter = FIELDS.get(parameter, parameter)
    needed = {"a", "c"} - {parameter, series}
    missing = needed - fixed.keys()
    if missing:
        raise InvalidParams(f"missing fixed fields {sorted(missing)}")
    return SweepSpec(parameter, values, fixed, outputs, series, series_values)


def load_sweep(path):
    with open(path) as fh:
        return parse_sweep(fh.read())


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _point_rows(spec, output):
    if output == "feedback":
        res = feedback_capacity(spec)
        return dict(
            regime=str(res.regime), rate=res.rate, kappa_min=res.kappa_min, k_inf=res.k_inf,
            lam=res.strategy.lam if res.strategy else None, k_z=res.strategy.k_z if res.strategy else None,
        )
    if output == "nonfeedback":
        res = nonfeedback_lower_bound(spec)
        return dict(regime=str(res.regime), rate=res.rate, k_inf=res.k_inf, lam=0.0, k_z=spec.kappa)
    if output == "butman":
        unstable = abs(spec.c) > 1
        rate = butman_rate(spec.c, spec.kappa, spec.k_w, allow_unstable=True)
        return dict(regime="ButmanOutOfDomain" if unstable else "Butman", rate=rate)
    region = regime_classify(spec)
    kmin = kappa_min(spec) if region is not Region.OUTSIDE else None
    return dict(regime=str(region), kappa_min=kmin)


def sweep_rows(sweep):
    """Yield one dict per (series value, sweep value, output), in input order."""
    for sval in sweep.series_values:
        for value in sweep.values:
            fields = dict(sweep.fixed)
            if sweep.series is not None:
                fields[sweep.series] = sval
            fields[sweep.parameter] = value
            base = {
                "series": sweep.series or "",
                "series_value": sval,
                "parameter": "kw" if sweep.parameter == "k_w" else sweep.parameter,
                "value": value,
                "a": fields["a"],
                "c": fields["c"],
                "kw": fields["k_w"],
                "kappa": fields["kappa"],
            }
            try:
                spec = ChannelSpec(**fields)
            except InvalidParams:
                spec = None
            for output in sweep.outputs:
                row = dict(base, output=output)
                if spec is None:
                    row["regime"] = "Skipped"
                else:
                    out = _point_rows(spec, output)
                    rate = out.get("rate")
                    row.update(
                        regime=out["regime"],
                        rate_nats=rate,
                        rate_bits=None if rate is None else rate / LN2,
                        kappa_min=out.get("kappa_min"),
                        k_inf=out.get("k_inf"),
                        **{"lambda": out.get("lam"), "k_z": out.get("k_z")},
                    )
                yield row


def render_csv(sweep):
    """Full CSV text: a schema comment line, the header, then the rows."""
    buf = io.StringIO()
    buf.write(f"# armacap sweep schema={SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in sweep_rows(sweep):
        writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()
