"""Write the sklearn-bundled Digits and Breast Cancer datasets as local CSV files.

Both ship inside scikit-learn, so no network access is needed. Output files have
one column per feature plus an integer ``label`` column:

    python3 scripts/fetch_datasets.py [--out data]
"""
import argparse
from pathlib import Path

from sklearn.datasets import load_breast_cancer, load_digits

from fspa.encoding import DataMatrix, save_csv

LOADERS = {"digits": load_digits, "breast_cancer": load_breast_cancer}


def write_dataset(name: str, out_dir: Path) -> Path:
    bunch = LOADERS[name]()
    names = [str(n).replace(" ", "_") for n in getattr(bunch, "feature_names", [])]
    if len(names) != bunch.data.shape[1]:
        names = [f"f{j}" for j in range(bunch.data.shape[1])]
    path = out_dir / f"{name}.csv"
    save_csv(DataMatrix(bunch.data, bunch.target, tuple(names)), path)
    return path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data")
    ap.add_argument("--only", choices=sorted(LOADERS))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in [args.only] if args.only else sorted(LOADERS):
        print(write_dataset(name, out))


if __name__ == "__main__":
    main()
