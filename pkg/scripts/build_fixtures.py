"""Regenerate the committed fixture bundles and scenario files."""
import argparse

from storagevalue.testnets import FIXTURE_DIR, write_fixtures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(FIXTURE_DIR), help="destination directory")
    args = ap.parse_args()
    root = write_fixtures(args.out)
    print(f"fixtures written to {root}")


if __name__ == "__main__":
    main()
