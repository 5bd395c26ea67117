"""JSON records for boundary laws and run manifests."""
from __future__ import annotations

import json
import platform
import re
from datetime import datetime, timezone
from typing import Any, Optional

from . import __version__
from .boundary import (LawRecord, Params, PeriodicBoundaryLaw, mp, to_mp)

__all__ = ["MalformedLawFile", "law_record_dict", "dumps_laws", "loads_laws",
           "make_manifest", "SIG_DIGITS"]

# enough digits that a reloaded law passes the same oracles as the original
SIG_DIGITS = 34
_RAW = re.compile(r'"@@num:([^"@]+)@@"')


class MalformedLawFile(ValueError):
    pass


def _default(o):
    if isinstance(o, mp.mpf):
        return f"@@num:{mp.nstr(o, SIG_DIGITS, strip_zeros=False)}@@"
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj: Any, **kw) -> str:
    """json.dumps that writes working-precision numbers as bare JSON numbers."""
    return _RAW.sub(r"\1", json.dumps(obj, default=_default, **kw))


def law_record_dict(rec: LawRecord) -> dict:
    return {
        "k": rec.params.k,
        "theta": rec.params.theta,
        "tau": rec.params.tau,
        "a": rec.law.a,
        "b": rec.law.b,
        "family": rec.law.family,
        "multiplicity": rec.multiplicity,
        "valid": rec.valid,
        "residuals": rec.residuals.as_dict(),
    }


def dumps_laws(records: list[LawRecord], manifest: Optional[dict] = None) -> str:
    body = [law_record_dict(r) for r in records]
    if manifest is None:
        return dumps(body, indent=2)
    return dumps({"manifest": manifest, "laws": body}, indent=2)


def loads_laws(text: str) -> list[tuple[Params, PeriodicBoundaryLaw, dict]]:
    """Parse a law file (wrapped ``{"laws": [...]}`` or a bare list).

    Numbers are read at working precision, so a file written by
    :func:`dumps_laws` reloads to the same laws.
    """
    try:
        data = json.loads(text, parse_float=to_mp)
    except json.JSONDecodeError as exc:
        raise MalformedLawFile(f"not valid JSON: {exc}") from exc
    if isinstance(data, dict):
        if "laws" not in data:
            raise MalformedLawFile("top-level object has no 'laws' entry")
        data = data["laws"]
    if not isinstance(data, list):
        raise MalformedLawFile("expected a list of law records")
    out = []
    for i, rec in enumerate(data):
        if not isinstance(rec, dict):
            raise MalformedLawFile(f"record {i} is not an object")
        try:
            k = rec["k"]
            if rec.get("theta") is not None:
                params = Params.from_theta(k, rec["theta"])
            elif rec.get("tau") is not None:
                params = Params.from_tau(k, rec["tau"])
            else:
                raise MalformedLawFile(f"record {i} has neither theta nor tau")
            law = PeriodicBoundaryLaw(rec["a"], rec["b"])
        except KeyError as exc:
            raise MalformedLawFile(f"record {i} lacks field {exc}") from exc
        except (TypeError, ValueError) as exc:
            if isinstance(exc, MalformedLawFile):
                raise
            raise MalformedLawFile(f"record {i}: {exc}") from exc
        out.append((params, law, rec))
    return out


def make_manifest(command: str, parameters: dict, tolerances: Optional[dict] = None,
                  seed: Optional[int] = None) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "tolerances": tolerances or {},
        "seed": seed,
        "version": __version__,
        "python": platform.python_version(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
