import pytest
from pydantic import ValidationError

from hybridrelay.settings import get_settings


def test_defaults(monkeypatch):
    for key in ("MAX_CONCURRENCY", "MC_CHUNK_SIZE", "DEFAULT_SEED", "QUAD_LIMITS", "OUTPUT_FORMAT"):
        monkeypatch.delenv(key, raising=False)
    s = get_settings()
    assert s.max_concurrency == 4
    assert s.mc_chunk_size == 65536
    assert s.default_seed == 2017
    assert s.quad_limits == [50, 200, 1000]
    assert s.output_format == "csv"


def test_environment_override(env):
    env(MAX_CONCURRENCY=2, DEFAULT_SEED=7, VALIDATE_GRID_SIZE=12, QUAD_EPSABS="1e-9")
    s = get_settings()
    assert s.max_concurrency == 2
    assert s.default_seed == 7
    assert s.validate_grid_size == 12
    assert s.quad_epsabs == 1e-9


def test_quad_limits_list(env):
    env(QUAD_LIMITS="10, 40,,160")
    assert get_settings().quad_limits == [10, 40, 160]


def test_cached_until_cleared(monkeypatch):
    first = get_settings()
    monkeypatch.setenv("MAX_CONCURRENCY", "9")
    assert get_settings() is first
    get_settings.cache_clear()
    assert get_settings().max_concurrency == 9


def test_rejects_zero_workers(env):
    env(MAX_CONCURRENCY=0)
    with pytest.raises(ValidationError):
        get_settings()


def test_rejects_unknown_output_format(env):
    env(OUTPUT_FORMAT="xml")
    with pytest.raises(ValidationError):
        get_settings()


def test_only_runtime_knobs():
    assert "environment" not in get_settings().model_dump()
