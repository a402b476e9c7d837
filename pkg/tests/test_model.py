import pytest

from studyatlas.model import (
    NA,
    Criterion,
    FieldValue,
    Schema,
    SchemaError,
    StudyRecord,
    default_schema,
    format_number,
    record_from_json,
    record_to_json,
    schema_from_manifest,
    schema_to_manifest,
    validate_record,
)

TABLE_KINDS = {
    "Main Author": "categorical",
    "Year": "numeric",
    "Location": "categorical",
    "Gesture": "categorical",
    "Number of Selected Gestures": "numeric",
    "Resolution": "categorical",
    "Hands-Free": "ordinal",
    "Adaptation of the Interaction Detection Algorithm to User": "binary",
    "Discreetness of Interactions": "ordinal",
    "Accuracy of Interaction Detection": "ordinal",
    "Sensors": "categorical",
    "No Additional Sensing": "binary",
    "Elicitation Study": "binary",
    "Evaluation of Different Settings": "categorical",
    "Earphone Type": "categorical",
    "Real-Time Processing": "binary",
    "Motivations": "categorical",
    "Keywords": "categorical",
}


class TestDefaultSchema:
    def test_has_34_criteria(self):
        assert len(default_schema()) == 34

    def test_kinds_match_encoding_table(self):
        schema = default_schema()
        for name, kind in TABLE_KINDS.items():
            assert schema[name].kind == kind, name

    def test_gesture_count_is_log_numeric(self):
        criterion = default_schema()["Number of Selected Gestures"]
        assert criterion.kind == "numeric"
        assert criterion.log_transform

    def test_resolution_answer_options(self):
        assert set(default_schema()["Resolution"].display_options()) == {"Semantic", "Coarse", "Fine", "N/A"}

    def test_discreetness_levels(self):
        assert default_schema()["Discreetness of Interactions"].ordinal_map == {
            "Low": 0.0, "Medium": 0.5, "High": 1.0}

    def test_display_defaults(self):
        assert default_schema().display_defaults() == (
            "Main Author", "Year", "Location", "Input Body Part", "Gesture")

    def test_all_non_text_participate_by_default(self):
        schema = default_schema()
        assert len(schema.participating()) == 34

    def test_three_valued_yes_scales_are_ordinal(self):
        schema = default_schema()
        assert schema["Hands-Free"].ordinal_map["Partly"] == 0.5
        assert schema["Eyes-Free"].ordinal_map["Visual Attention"] == 0.5
        assert schema["Possible on One Ear"].ordinal_map["Yes (Performance Loss)"] == 0.5


class TestManifestRoundTrip:
    def test_default_schema_round_trips(self):
        schema = default_schema()
        assert schema_from_manifest(schema_to_manifest(schema)) == schema

    def test_custom_schema_round_trips(self):
        schema = Schema([
            Criterion(name="A", kind="ordinal", answer_options=("x", "y"),
                      ordinal_values=(("x", 0.0), ("y", 1.0)), na_allowed=False),
            Criterion(name="B", kind="binary", binary_labels=("On", "Off")),
            Criterion(name="C", kind="categorical", multi_valued=True),
            Criterion(name="D", kind="numeric", log_transform=True, display_default=True),
            Criterion(name="E", kind="text", similarity_participates=False),
        ])
        assert schema_from_manifest(schema_to_manifest(schema)) == schema


class TestSchemaInvariants:
    def test_ordinal_values_must_cover_options(self):
        with pytest.raises(SchemaError):
            Criterion(name="X", kind="ordinal", answer_options=("a", "b"),
                      ordinal_values=(("a", 0.0),))

    def test_ordinal_values_must_span_unit_interval(self):
        with pytest.raises(SchemaError):
            Criterion(name="X", kind="ordinal", answer_options=("a", "b"),
                      ordinal_values=(("a", 0.2), ("b", 1.0)))

    def test_multi_valued_numeric_rejected(self):
        with pytest.raises(SchemaError):
            Criterion(name="X", kind="numeric", multi_valued=True)

    def test_log_transform_needs_numeric(self):
        with pytest.raises(SchemaError):
            Criterion(name="X", kind="binary", log_transform=True)

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError):
            Schema([Criterion(name="X", kind="text"), Criterion(name="X", kind="numeric")])

    def test_na_literal_is_not_an_option(self):
        with pytest.raises(SchemaError):
            Criterion(name="X", kind="categorical", answer_options=("a", "N/A"))


def _schema():
    return Schema([
        Criterion(name="Discreetness of Interactions", kind="ordinal",
                  answer_options=("Low", "Medium", "High"),
                  ordinal_values=(("Low", 0.0), ("Medium", 0.5), ("High", 1.0))),
        Criterion(name="Year", kind="numeric", na_allowed=False),
        Criterion(name="Sensors", kind="categorical", multi_valued=True),
    ])


def _record(values, year=2020):
    return StudyRecord.build("s1", year, values)


class TestValidateRecord:
    def test_clean_record_passes(self):
        record = _record({
            "Discreetness of Interactions": FieldValue.ordinal("High"),
            "Year": FieldValue.number(2020),
            "Sensors": FieldValue.categories(("IMU",)),
        })
        assert validate_record(record, _schema()) == []

    def test_missing_criterion(self):
        record = _record({
            "Discreetness of Interactions": FieldValue.ordinal("High"),
            "Year": FieldValue.number(2020),
        })
        report = validate_record(record, _schema())
        assert len(report) == 1
        assert report[0].rule == "missing criterion"
        assert report[0].criterion == "Sensors"

    def test_unknown_ordinal_option(self):
        record = _record({
            "Discreetness of Interactions": FieldValue.ordinal("Extreme"),
            "Year": FieldValue.number(2020),
            "Sensors": FieldValue.categories(("IMU",)),
        })
        report = validate_record(record, _schema())
        assert [v.rule for v in report] == ["unknown option"]

    def test_na_where_not_allowed(self):
        record = _record({
            "Discreetness of Interactions": FieldValue.ordinal("High"),
            "Year": NA,
            "Sensors": FieldValue.categories(("IMU",)),
        })
        assert [v.rule for v in report_rules(record)] == ["na not allowed"]

    def test_year_mismatch(self):
        record = _record({
            "Discreetness of Interactions": FieldValue.ordinal("High"),
            "Year": FieldValue.number(2019),
            "Sensors": FieldValue.categories(("IMU",)),
        }, year=2020)
        assert [v.rule for v in report_rules(record)] == ["year mismatch"]

    def test_unexpected_criterion(self):
        record = _record({
            "Discreetness of Interactions": FieldValue.ordinal("High"),
            "Year": FieldValue.number(2020),
            "Sensors": FieldValue.categories(("IMU",)),
            "Ghost": FieldValue.text("boo"),
        })
        assert [v.rule for v in report_rules(record)] == ["unexpected criterion"]

    def test_kind_mismatch(self):
        record = _record({
            "Discreetness of Interactions": FieldValue.number(0.5),
            "Year": FieldValue.number(2020),
            "Sensors": FieldValue.categories(("IMU",)),
        })
        assert [v.rule for v in report_rules(record)] == ["kind mismatch"]

    def test_snapshot_records_all_validate(self, snapshot):
        for record in snapshot.records:
            assert validate_record(record, snapshot.schema) == []


def report_rules(record):
    return validate_record(record, _schema())


class TestFieldValue:
    def test_categories_are_frozen_sets(self):
        value = FieldValue.categories(["b", "a", "b"])
        assert value.value == frozenset({"a", "b"})

    def test_na_is_singleton_like(self):
        assert NA.is_na
        assert NA == FieldValue("na", None)

    def test_record_json_round_trip(self, snapshot):
        for record in snapshot.records:
            assert record_from_json(record_to_json(record)) == record


@pytest.mark.parametrize("value,expected", [
    (7.0, "7"),
    (2016.0, "2016"),
    (9.5, "9.5"),
    (0.0, "0"),
])
def test_format_number(value, expected):
    assert format_number(value) == expected
