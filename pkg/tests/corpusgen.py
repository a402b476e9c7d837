"""Seeded random-corpus generation for the property suites."""

import random

from studyatlas.model import NA, Criterion, FieldValue, Schema, StudyRecord

def generator_schema() -> Schema:
    return Schema([
        Criterion(name="Device Name", kind="categorical", na_allowed=False),  # unique per record
        Criterion(name="Year", kind="numeric", na_allowed=False),
        Criterion(name="Score", kind="ordinal", answer_options=("Low", "Mid", "High"),
                  ordinal_values=(("Low", 0.0), ("Mid", 0.5), ("High", 1.0))),
        Criterion(name="Flag", kind="binary"),
        Criterion(name="Active", kind="binary", na_allowed=False),
        Criterion(name="Tags", kind="categorical", multi_valued=True),
        Criterion(name="Family", kind="categorical", answer_options=("Alpha", "Beta", "Gamma")),
        Criterion(name="Count", kind="numeric", log_transform=True),
        Criterion(name="Weight", kind="numeric"),
        Criterion(name="Free", kind="text", similarity_participates=False),
    ])


TAG_POOL = ("imu", "mic", "ppg", "eog", "emg", "radar", "speaker", "camera")


def random_record(rng: random.Random, index: int, schema: Schema) -> StudyRecord:
    values = {}
    for criterion in schema:
        roll = rng.random()
        if criterion.na_allowed and roll < 0.15:
            values[criterion.name] = NA
            continue
        if criterion.name == "Device Name":
            values[criterion.name] = FieldValue.categories((f"device-{index}",))
        elif criterion.kind == "ordinal":
            values[criterion.name] = FieldValue.ordinal(rng.choice(criterion.answer_options))
        elif criterion.kind == "binary":
            values[criterion.name] = FieldValue.binary(rng.random() < 0.5)
        elif criterion.kind == "categorical" and criterion.multi_valued:
            if rng.random() < 0.1:
                values[criterion.name] = FieldValue.categories(())
            else:
                values[criterion.name] = FieldValue.categories(
                    rng.sample(TAG_POOL, rng.randint(1, 4)))
        elif criterion.kind == "categorical":
            values[criterion.name] = FieldValue.categories((rng.choice(criterion.answer_options),))
        elif criterion.name == "Year":
            values[criterion.name] = FieldValue.number(rng.randint(1990, 2024))
        elif criterion.kind == "numeric":
            values[criterion.name] = FieldValue.number(round(rng.uniform(0.0, 100.0), 3))
        else:
            values[criterion.name] = FieldValue.text(f"note {index}")
    year_value = values["Year"]
    year = int(year_value.value) if year_value.kind == "number" else 0
    return StudyRecord.build(f"r{index:03d}", year, values, authors=(f"Author {index}",))


def random_corpus(rng: random.Random, size: int):
    schema = generator_schema()
    return schema, [random_record(rng, i, schema) for i in range(size)]
