"""Regenerate the bundled synthetic datasets in place.

The outputs are frozen in the repository; rerunning this script must be a
no-op unless the generation parameters in ``pricedisclosure.data`` change.
"""

from pathlib import Path

from pricedisclosure.data import BUILTIN_MANIFESTS, synthesize, write_prices

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "pricedisclosure" / "datasets"


def main() -> None:
    for product in sorted(BUILTIN_MANIFESTS):
        prices = synthesize(product)
        out = OUT_DIR / f"{product}.csv"
        write_prices(prices, out)
        values = prices.values()
        print(
            f"{product}: n={len(prices)} min={values.min():.2f} "
            f"mean={values.mean():.2f} max={values.max():.2f} -> {out.name}"
        )


if __name__ == "__main__":
    main()
