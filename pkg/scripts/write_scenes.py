"""Write the reference scenes to scenes/*.json."""
import argparse
from pathlib import Path

from crofton.scene import golden_scenes, save


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "scenes")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, sc in golden_scenes().items():
        save(sc, args.out / f"{name}.json")
        print(args.out / f"{name}.json")


if __name__ == "__main__":
    main()
