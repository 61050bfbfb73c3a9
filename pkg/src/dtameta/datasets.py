"""Bundled example datasets.

Telomerase is complete (10 bladder-cancer studies using the telomerase
marker). For the two larger published meta-analyses only the first six
studies are bundled; they exercise ingestion and fixed-effect naming, not
posterior reproduction.
"""

from __future__ import annotations

from .data import Dataset, IngestOptions, parse_dataset

TELOMERASE_CSV = """\
studynames,TP,FP,TN,FN
Ito_1998,25,1,25,8
Rahat_1998,17,3,11,4
Kavaler_1998,88,16,31,16
Yoshida_1997,16,3,80,10
Ramakumar_1999,40,1,137,17
Landman_1998,38,6,24,9
Kinoshita_1997,23,0,12,19
Gelmini_2000,27,2,18,6
Cheng_2000,14,3,29,3
Cassel_2001,37,22,7,7
"""

SCHEIDLER_HEAD_CSV = """\
studynames,modality,TP,FP,FN,TN
Grumbine_1981,CT,0,1,6,17
Walsh_1981,CT,12,3,3,7
Brenner_1982,CT,4,1,2,13
Villasanta_1983,CT,10,4,3,25
vanEngelshoven_1984,CT,3,1,4,12
Bandy_1985,CT,9,3,3,29
"""

CATHETER_HEAD_CSV = """\
studynames,type,prevalence,TP,FP,TN,FN
Cooper_1985,Semi-quantitative,3.6,12,29,289,0
Gutierrez_1992,Semi-quantitative,12.2,10,14,72,2
Cercenado_1990,Semi-quantitative,12.9,17,36,85,1
Rello_1991,Semi-quantitative,13.2,13,18,67,0
Maki_1977,Semi-quantitative,1.6,4,21,225,0
Aufwerber_1991,Semi-quantitative,3.1,15,122,403,2
"""

_BUILTINS = {
    "telomerase": (TELOMERASE_CSV, IngestOptions()),
    "scheidler_head": (SCHEIDLER_HEAD_CSV, IngestOptions(modality="modality")),
    "catheter_head": (CATHETER_HEAD_CSV, IngestOptions(modality="type")),
}


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def builtin_csv(name: str) -> str:
    try:
        return _BUILTINS[name.lower()][0]
    except KeyError:
        raise KeyError(f"unknown builtin dataset {name!r}; available: {', '.join(_BUILTINS)}") from None


def load_builtin(name: str) -> Dataset:
    csv_text, options = _BUILTINS[name.lower()]
    return parse_dataset(csv_text, options)


def telomerase() -> Dataset:
    return load_builtin("telomerase")
