#!/usr/bin/env python3
"""Rebuild data/adult.csv and data/credit.csv from PyPI wheels that vendor the UCI files.

adult.csv  <- responsibly 0.1.2 (responsibly/dataset/adult/adult.data), header row added.
credit.csv <- ethicml 1.3.0 (ethicml/data/csvs/UCI_Credit_Card.csv), one-hot EDUCATION /
              MARRIAGE folded back into integer codes and SEX restored to the UCI coding
              (1 = male, 2 = female).
"""
import csv
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]


def fetch(pkg, dest):
    subprocess.check_call(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", pkg, "-d", dest]
    )
    return next(Path(dest).glob(pkg.split("==")[0].replace("-", "_") + "*.whl"))


def build_adult(tmp):
    whl = zipfile.ZipFile(fetch("responsibly==0.1.2", tmp))
    raw = whl.read("responsibly/dataset/adult/adult.data").decode()
    rows = [
        [c.strip() for c in line.split(",")]
        for line in raw.splitlines()
        if line.strip()
    ]
    with open(OUT / "adult.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(ADULT_COLUMNS)
        w.writerows(rows)
    return len(rows)


def build_credit(tmp):
    whl = zipfile.ZipFile(fetch("ethicml==1.3.0", tmp))
    raw = whl.read("ethicml/data/csvs/UCI_Credit_Card.csv").decode()
    reader = csv.DictReader(io.StringIO(raw))
    pay = ["PAY_0", "PAY_2", "PAY_3", "PAY_4", "PAY_5", "PAY_6"]
    bill = [f"BILL_AMT{i}" for i in range(1, 7)]
    amt = [f"PAY_AMT{i}" for i in range(1, 7)]
    header = ["ID", "LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE"] + pay + bill + amt
    header.append("default.payment.next.month")
    n = 0
    with open(OUT / "credit.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in reader:
            edu = [i for i in range(7) if row[f"EDUCATION_{i}"] == "1"]
            mar = [i for i in range(4) if row[f"MARRIAGE_{i}"] == "1"]
            assert len(edu) == 1 and len(mar) == 1
            sex = "2" if row["SEX"] == "1" else "1"
            out = [row["ID"], row["LIMIT_BAL"], sex, str(edu[0]), str(mar[0]), row["AGE"]]
            out += [row[c] for c in pay + bill + amt]
            out.append(row["default-payment-next-month"])
            w.writerow(out)
            n += 1
    return n


def main():
    OUT.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        print("adult rows:", build_adult(tmp))
        print("credit rows:", build_credit(tmp))


if __name__ == "__main__":
    main()
