import pytest

from studyatlas.config import ServiceConfig, load_config


def test_defaults():
    config = load_config(env={})
    assert config.port == 8350
    assert config.embedding_provider == "fallback"
    assert config.matcher().auto_threshold == 0.90


def test_file_values(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "host: 0.0.0.0\nport: 9000\nauto_threshold: 0.8\nmaintainer_token: s3cret\n", "utf-8")
    config = load_config(path, env={})
    assert config.host == "0.0.0.0"
    assert config.port == 9000
    assert config.matcher().auto_threshold == 0.8
    assert config.maintainer_token == "s3cret"


def test_env_overrides_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("port: 9000\nstrip_diacritics: false\n", "utf-8")
    env = {
        "STUDYATLAS_PORT": "9100",
        "STUDYATLAS_STRIP_DIACRITICS": "true",
        "STUDYATLAS_FLAG_THRESHOLD": "0.5",
    }
    config = load_config(path, env=env)
    assert config.port == 9100
    assert config.strip_diacritics is True
    assert config.matcher().flag_threshold == 0.5


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("prot: 9000\n", "utf-8")
    with pytest.raises(ValueError, match="prot"):
        load_config(path, env={})


def test_matcher_mirrors_threshold_fields():
    config = ServiceConfig(title_weight=0.5, year_weight=0.3, author_weight=0.2,
                           author_flag_distance=3)
    matcher = config.matcher()
    assert (matcher.title_weight, matcher.year_weight, matcher.author_weight) == (0.5, 0.3, 0.2)
    assert matcher.author_flag_distance == 3
