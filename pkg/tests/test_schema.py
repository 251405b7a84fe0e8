import pytest

from sacluster import (
    Attribute,
    AttributeRole,
    AttributeSchema,
    DataError,
    SchemaError,
    load_dataset,
    sort_view,
    strip_identifiers,
)

from conftest import TABLE1_CSV, table1_schema


def test_load_table1(raw_table1):
    assert len(raw_table1) == 6
    assert raw_table1.global_ranges == {"Age": (25.0, 40.0)}
    assert [r.record_id for r in raw_table1.records] == list(range(6))
    assert raw_table1.records[0]["Name"] == "Ajay"
    assert raw_table1.records[0]["Zip code"] == "443350"


def test_single_row_range():
    ds = load_dataset(b"Name,Age,Gender,Zip code,Disease\nA,25,Male,443350,Flu\n", table1_schema())
    assert ds.global_ranges["Age"] == (25.0, 25.0)


def test_decimal_and_quoted_fields():
    src = b'Name,Age,Gender,Zip code,Disease\n"Doe, J",25.5,Male,443350,"Flu, seasonal"\n'
    ds = load_dataset(src, table1_schema())
    assert ds.records[0]["Age"] == 25.5
    assert ds.records[0]["Name"] == "Doe, J"
    assert ds.records[0]["Disease"] == "Flu, seasonal"


def test_extra_columns_dropped():
    src = b"Name,Age,Extra,Gender,Zip code,Disease\nA,25,x,Male,443350,Flu\n"
    ds = load_dataset(src, table1_schema())
    assert set(ds.records[0].values) == set(table1_schema().names)


@pytest.mark.parametrize(
    "src, match",
    [
        (b"", "empty"),
        (b"Name,Age,Gender,Zip code,Disease\n", "no data rows"),
        (b"Name,Age,Gender,Disease\nA,25,Male,Flu\n", "missing column"),
        (b"Name,Age,Gender,Zip code,Disease\nA,old,Male,443350,Flu\n", "non-numeric"),
        (b"Name,Age,Gender,Zip code,Disease\nA,inf,Male,443350,Flu\n", "non-numeric"),
        (b"Name,Age,Age,Gender,Zip code,Disease\nA,1,2,Male,443350,Flu\n", "duplicate header"),
        (b"Name,Age,Gender,Zip code,Disease\nA,,Male,443350,Flu\n", "row 2: missing value"),
    ],
)
def test_load_errors(src, match):
    with pytest.raises(DataError, match=match):
        load_dataset(src, table1_schema())


def test_schema_invariants():
    q = Attribute("Age", AttributeRole.QUASI_NUMERIC)
    s = Attribute("Disease", AttributeRole.SENSITIVE)
    with pytest.raises(SchemaError, match="duplicate"):
        AttributeSchema((q, q, s))
    with pytest.raises(SchemaError, match="exactly one sensitive"):
        AttributeSchema((q,))
    with pytest.raises(SchemaError, match="quasi_categorical"):
        AttributeSchema((Attribute("Age", AttributeRole.QUASI_NUMERIC, taxonomy_path="t.csv"), s))
    schema = table1_schema()
    assert (schema.r, schema.s) == (1, 2)
    assert schema.sensitive == "Disease"


def test_only_identifiers_rejected():
    with pytest.raises(SchemaError, match="no quasi-identifiers remain"):
        AttributeSchema(
            (Attribute("Name", AttributeRole.IDENTIFIER), Attribute("Disease", AttributeRole.SENSITIVE))
        )


def test_strip_identifiers(raw_table1):
    ds = strip_identifiers(raw_table1)
    assert ds.schema.names == ["Age", "Gender", "Zip code", "Disease"]
    for before, after in zip(raw_table1.records, ds.records):
        assert after.values == {k: v for k, v in before.values.items() if k != "Name"}
    assert strip_identifiers(ds) is ds


def test_sort_view(raw_table1):
    order = sort_view(raw_table1, "Age")
    assert [raw_table1.records[i]["Age"] for i in order] == [25, 26, 27, 36, 39, 40]
    assert order == sort_view(raw_table1, "Age")
    with pytest.raises(SchemaError):
        sort_view(raw_table1, "Gender")


def test_sort_view_ties_keep_record_order():
    src = "Name,Age,Gender,Zip code,Disease\n" + "".join(f"A,30,Male,443350,Flu\n" for _ in range(4))
    ds = load_dataset(src.encode(), table1_schema())
    assert sort_view(ds, "Age") == [0, 1, 2, 3]


def test_sort_view_reversed_input():
    lines = TABLE1_CSV.read_text().splitlines()
    reversed_src = "\n".join([lines[0], *reversed(lines[1:])]) + "\n"
    ds = load_dataset(reversed_src.encode(), table1_schema())
    assert [ds.records[i]["Age"] for i in sort_view(ds, "Age")] == [25, 26, 27, 36, 39, 40]
