#!/usr/bin/env python3
"""Download the public benchmark datasets and convert them to CSV + schema pairs.

Usage: scripts/fetch_data.py [--out data] [--only NAME ...]

Each dataset lists its sources in preference order. A source is either a
direct URL or a member of a pinned PyPI wheel (useful when only a package
index is reachable). Raw bytes are checked against the pinned SHA-256 when
one is recorded; unpinned sources print their digest so it can be pinned.
Nothing is redistributed with the repository.
"""

import argparse
import csv
import hashlib
import io
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

COMMON_DATASETS_WHEEL = (
    "common-datasets==0.3.10",
    "common_datasets-0.3.10-py3-none-any.whl",
    "6e2a68ee16b29ea071c3c7a14c1ae36509c14adcdac342ea6af82859c82d6bc4",
)
CD_PREFIX = "common_datasets/data/classification/"


def url_source(url, sha256=None):
    return {"kind": "url", "url": url, "sha256": sha256}


def wheel_source(member, sha256):
    return {"kind": "wheel", "wheel": COMMON_DATASETS_WHEEL, "member": member, "sha256": sha256}


# --- raw fetching -----------------------------------------------------------

_wheel_cache = {}


def _fetch_wheel(spec):
    req, filename, digest = spec
    if filename in _wheel_cache:
        return _wheel_cache[filename]
    tmp = tempfile.mkdtemp(prefix="featgen-wheel-")
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", req, "-d", tmp],
        check=True,
    )
    path = os.path.join(tmp, filename)
    with open(path, "rb") as fh:
        data = fh.read()
    got = hashlib.sha256(data).hexdigest()
    if got != digest:
        raise RuntimeError(f"checksum mismatch for {filename}: {got}")
    _wheel_cache[filename] = zipfile.ZipFile(io.BytesIO(data))
    return _wheel_cache[filename]


def fetch_raw(source):
    if source["kind"] == "url":
        with urllib.request.urlopen(source["url"], timeout=30) as resp:
            data = resp.read()
    else:
        data = _fetch_wheel(source["wheel"]).read(source["member"])
    got = hashlib.sha256(data).hexdigest()
    if source["sha256"] is None:
        print(f"  unpinned source, sha256={got}")
    elif got != source["sha256"]:
        raise RuntimeError(f"checksum mismatch: expected {source['sha256']}, got {got}")
    return data


def fetch_first(sources):
    errors = []
    for src in sources:
        try:
            return fetch_raw(src)
        except Exception as exc:  # noqa: BLE001 - try the next mirror
            errors.append(f"{src.get('url') or src.get('member')}: {exc}")
    raise RuntimeError("all sources failed:\n    " + "\n    ".join(errors))


# --- output -----------------------------------------------------------------


def toml_str(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dataset(out_dir, name, columns, rows, label, missing):
    """columns: list of (name, kind, categories-or-None, description-or-None)."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([c[0] for c in columns])
        w.writerows(rows)
    lines = [f"missing = {toml_str(missing)}"]
    if label is not None:
        lines.append(f"label = {toml_str(label)}")
    for cname, kind, cats, desc in columns:
        lines.append("")
        lines.append("[[column]]")
        lines.append(f"name = {toml_str(cname)}")
        lines.append(f"kind = {toml_str(kind)}")
        if cats is not None:
            lines.append("categories = [" + ", ".join(toml_str(c) for c in cats) + "]")
        if desc is not None:
            lines.append(f"description = {toml_str(desc)}")
    with open(os.path.join(out_dir, f"{name}.schema.toml"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"  wrote {csv_path} ({len(rows)} rows, {len(columns)} columns)")


def cont(name, desc=None):
    return (name, "continuous", None, desc)


def nom(name, cats, desc=None):
    return (name, "nominal", list(cats), desc)


# --- datasets ---------------------------------------------------------------


def pima(out):
    raw = fetch_first(
        [
            url_source(
                "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.data.csv"
            ),
            wheel_source(
                CD_PREFIX + "pima/pima.dat",
                "c385b42aa936c423cde74109f6448fc5bc8423eeae0d4defb4185c03a5ce8a47",
            ),
        ]
    ).decode()
    rows = []
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        parts = [p.strip() for p in line.split(",")]
        cls = parts[8]
        cls = {"tested_negative": "0", "tested_positive": "1", "negative": "0", "positive": "1"}.get(cls, cls)
        rows.append(parts[:8] + [cls])
    assert len(rows) == 768, len(rows)
    columns = [
        cont("Pregnancies", "number of times pregnant"),
        cont("Glucose", "plasma glucose concentration"),
        cont("BloodPressure", "diastolic blood pressure"),
        cont("SkinThickness", "triceps skin fold thickness"),
        cont("Insulin", "serum insulin"),
        cont("BMI", "body mass index"),
        cont("DiabetesPedigreeFunction", "diabetes pedigree function"),
        cont("Age", "age in years"),
        nom("Outcome", ["0", "1"], "diabetes diagnosis"),
    ]
    write_dataset(out, "pima", columns, rows, "Outcome", "")


def breast_cancer_coimbra(out):
    raw = fetch_first([url_source(f"{UCI}/00451/dataR2.csv")]).decode()
    reader = csv.reader(io.StringIO(raw))
    header = next(reader)
    rows = [r for r in reader if r]
    assert len(header) == 10 and len(rows) == 116, (header, len(rows))
    columns = [
        cont("Age", "age in years"),
        cont("BMI", "body mass index"),
        cont("Glucose", "glucose"),
        cont("Insulin", "insulin"),
        cont("HOMA", "homeostasis model assessment"),
        cont("Leptin", "leptin"),
        cont("Adiponectin", "adiponectin"),
        cont("Resistin", "resistin"),
        cont("MCP1", "monocyte chemoattractant protein 1"),
        nom("Classification", ["1", "2"], "healthy control or patient"),
    ]
    write_dataset(out, "breast_cancer_coimbra", columns, rows, "Classification", "")


def spectf(out):
    parts = []
    for split, digest in [
        ("train", "9c837e4fd4b7931d9be5304989e39f284f35f767518ffd4dfd42a6a519a9f30c"),
        ("test", "467a65c81e14a71c029fa58bf9350ecdf28ff072303b99a832e8606e193a3882"),
    ]:
        parts.append(
            fetch_first(
                [
                    url_source(f"{UCI}/spect/SPECTF.{split}", digest),
                    wheel_source(CD_PREFIX + f"spect_f/SPECTF.{split}.txt", digest),
                ]
            ).decode()
        )
    rows = []
    for raw in parts:
        for line in raw.splitlines():
            if line.strip():
                rows.append([p.strip() for p in line.split(",")])
    assert len(rows) == 267, len(rows)
    names = []
    for i in range(1, 23):
        names += [f"F{i}R", f"F{i}S"]
    columns = [nom("OverallDiagnosis", ["0", "1"], "overall diagnosis")] + [
        cont(n) for n in names
    ]
    write_dataset(out, "spectf", columns, rows, "OverallDiagnosis", "")


QSAR_NAMES = (
    "SpMax_L J_Dz(e) nHM F01[N-N] F04[C-N] NssssC nCb- C% nCp nO F03[C-N] SdssC "
    "HyWi_B(m) LOC SM6_L F03[C-O] Me Mi nN-N nArNO2 nCRX3 SpPosA_B(p) nCIR "
    "B01[C-Br] B03[C-Cl] N-073 SpMax_A Psi_i_1d B04[C-Br] SdO TI2_L nCrt C-026 "
    "F02[C-N] nHDon SpMax_B(m) Psi_i_A nN SM6_B(m) nArCOOR nX"
).split()


def qsar_biodeg(out):
    raw = fetch_first([url_source(f"{UCI}/00254/biodeg.csv")]).decode()
    rows = [line.strip().split(";") for line in raw.splitlines() if line.strip()]
    assert len(rows) == 1055 and all(len(r) == 42 for r in rows)
    columns = [cont(n) for n in QSAR_NAMES] + [nom("Class", ["RB", "NRB"], "biodegradability")]
    write_dataset(out, "qsar_biodeg", columns, rows, "Class", "")


def hepatitis(out):
    raw = fetch_first(
        [
            url_source(
                f"{UCI}/hepatitis/hepatitis.data",
                "9971f9d18abb4fc9dd6749eefb0f864b36fa7bdd59f54188c0b148a5c28214bc",
            ),
            wheel_source(
                CD_PREFIX + "hepatitis/hepatitis.data.txt",
                "9971f9d18abb4fc9dd6749eefb0f864b36fa7bdd59f54188c0b148a5c28214bc",
            ),
        ]
    ).decode()
    rows = [line.strip().split(",") for line in raw.splitlines() if line.strip()]
    assert len(rows) == 155
    yn = ["1", "2"]
    columns = [
        nom("Class", ["1", "2"], "die or live"),
        cont("Age", "age in years"),
        nom("Sex", yn),
        nom("Steroid", yn),
        nom("Antivirals", yn),
        nom("Fatigue", yn),
        nom("Malaise", yn),
        nom("Anorexia", yn),
        nom("LiverBig", yn),
        nom("LiverFirm", yn),
        nom("SpleenPalpable", yn),
        nom("Spiders", yn),
        nom("Ascites", yn),
        nom("Varices", yn),
        cont("Bilirubin", "bilirubin"),
        cont("AlkPhosphate", "alkaline phosphatase"),
        cont("Sgot", "aspartate aminotransferase"),
        cont("Albumin", "albumin"),
        cont("Protime", "prothrombin time"),
        nom("Histology", yn),
    ]
    write_dataset(out, "hepatitis", columns, rows, "Class", "?")


def ilpd(out):
    raw = fetch_first(
        [url_source(f"{UCI}/00225/Indian%20Liver%20Patient%20Dataset%20(ILPD).csv")]
    ).decode()
    rows = [line.strip().split(",") for line in raw.splitlines() if line.strip()]
    assert len(rows) == 583
    columns = [
        cont("Age", "age in years"),
        nom("Gender", ["Female", "Male"]),
        cont("TotalBilirubin", "total bilirubin"),
        cont("DirectBilirubin", "direct bilirubin"),
        cont("AlkPhosphate", "alkaline phosphatase"),
        cont("Sgpt", "alanine aminotransferase"),
        cont("Sgot", "aspartate aminotransferase"),
        cont("TotalProteins", "total proteins"),
        cont("Albumin", "albumin"),
        cont("AGRatio", "albumin and globulin ratio"),
        nom("Selector", ["1", "2"], "liver patient or not"),
    ]
    write_dataset(out, "ilpd", columns, rows, "Selector", "")


DATASETS = {
    "pima": pima,
    "breast_cancer_coimbra": breast_cancer_coimbra,
    "spectf": spectf,
    "qsar_biodeg": qsar_biodeg,
    "hepatitis": hepatitis,
    "ilpd": ilpd,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--only", nargs="*", choices=sorted(DATASETS))
    args = ap.parse_args()
    failed = []
    for name in args.only or DATASETS:
        print(f"{name}:")
        try:
            DATASETS[name](args.out)
        except Exception as exc:  # noqa: BLE001 - report and continue
            print(f"  FAILED: {exc}")
            failed.append(name)
    if failed:
        print("unavailable: " + ", ".join(failed))
        sys.exit(1)


if __name__ == "__main__":
    main()
