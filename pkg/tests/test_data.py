"""Price-list parsing, bundled datasets, and synthesis."""

import numpy as np
import pytest

from pricedisclosure.data import (
    BUILTIN_MANIFESTS,
    PriceEntry,
    PriceList,
    builtin_dataset,
    format_cents,
    load_prices,
    parse_price,
    synthesize,
    write_prices,
)
from pricedisclosure.errors import (
    DatasetNotFoundError,
    ParseError,
    ValidationError,
)


def test_parse_price_valid():
    assert parse_price("297.00") == 29700
    assert parse_price("24.99") == 2499
    assert parse_price("5") == 500
    assert parse_price("0.01") == 1


@pytest.mark.parametrize("bad", ["1.999", "abc", ""])
def test_parse_price_malformed(bad):
    with pytest.raises(ParseError):
        parse_price(bad)


@pytest.mark.parametrize("bad", ["0", "-1.50"])
def test_parse_price_nonpositive(bad):
    with pytest.raises(ValidationError):
        parse_price(bad)


def test_format_cents_round_trip():
    for cents in (1, 99, 100, 29700, 123456):
        assert parse_price(format_cents(cents)) == cents


def test_price_list_validation():
    with pytest.raises(ValidationError):
        PriceList("x", ())
    with pytest.raises(ValidationError):
        PriceList("x", (PriceEntry("s", 0),))


def test_price_list_accessors():
    entries = (PriceEntry("a", 300), PriceEntry("b", 100), PriceEntry("a", 200))
    prices = PriceList("x", entries)
    assert prices.min_cents == 100
    assert prices.min_index == 1
    assert prices.min_price == 1.0
    assert list(prices.cents_array()) == [300, 100, 200]
    assert prices.per_source_counts() == {"a": 2, "b": 1}
    assert [entries[i].cents for i in prices.ascending_order()] == [100, 200, 300]
    sub = prices.subset([1, 2])
    assert [e.cents for e in sub.entries] == [100, 200]


def test_ascending_order_is_stable_for_ties():
    entries = (PriceEntry("a", 100), PriceEntry("b", 100), PriceEntry("c", 50))
    assert list(PriceList("x", entries).ascending_order()) == [2, 0, 1]


def test_load_write_round_trip(tmp_path):
    original = builtin_dataset("mouse")
    path = tmp_path / "mouse.csv"
    write_prices(original, path)
    again = load_prices(path)
    assert again == original


def test_load_errors(tmp_path):
    with pytest.raises(DatasetNotFoundError):
        load_prices(tmp_path / "missing.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text('"product_id","source","price"\n')
    with pytest.raises(ValidationError, match="empty"):
        load_prices(empty)
    mixed = tmp_path / "mixed.csv"
    mixed.write_text(
        '"product_id","source","price"\n"a","s","1.00"\n"b","s","2.00"\n'
    )
    with pytest.raises(ParseError):
        load_prices(mixed)
    bad_row = tmp_path / "bad.csv"
    bad_row.write_text('"product_id","source","price"\n"a","s","oops"\n')
    with pytest.raises(ParseError, match="row 2"):
        load_prices(bad_row)


def test_builtin_datasets_match_manifests():
    for name, manifest in BUILTIN_MANIFESTS.items():
        prices = builtin_dataset(name)
        assert prices.product_id == manifest.product_id
        assert prices.per_source_counts() == manifest.per_source_counts
        assert prices.min_cents == manifest.stated_minimum


def test_builtin_unknown_name():
    with pytest.raises(DatasetNotFoundError):
        builtin_dataset("toaster")


def test_builtin_env_override(tmp_path, monkeypatch):
    # Override files must still satisfy the product manifest, so perturb
    # one non-minimum price and keep counts and the minimum intact.
    bundled = builtin_dataset("printer")
    entries = list(bundled.entries)
    victim = max(range(len(entries)), key=lambda i: entries[i].cents)
    entries[victim] = PriceEntry(entries[victim].source, entries[victim].cents + 1)
    custom = PriceList("printer", tuple(entries))
    write_prices(custom, tmp_path / "printer.csv")
    monkeypatch.setenv("DISCLOSE_DATA_DIR", str(tmp_path))
    assert builtin_dataset("printer") == custom
    assert builtin_dataset("printer") != bundled


def test_builtin_env_override_rejects_manifest_mismatch(tmp_path, monkeypatch):
    custom = PriceList("printer", (PriceEntry("s", 29700), PriceEntry("s", 29800)))
    write_prices(custom, tmp_path / "printer.csv")
    monkeypatch.setenv("DISCLOSE_DATA_DIR", str(tmp_path))
    with pytest.raises(ValidationError):
        builtin_dataset("printer")


def test_synthesize_is_deterministic_and_matches_bundle():
    for name in BUILTIN_MANIFESTS:
        assert synthesize(name).entries == builtin_dataset(name).entries
        assert synthesize(name) == synthesize(name)


def test_synthesized_minimum_placement():
    prices = synthesize("printer")
    assert prices.entries[0].cents == prices.min_cents
    assert np.sum(prices.cents_array() == prices.min_cents) == 1
