"""Settings resolution: flags > environment > config file."""

import pytest

from trajvault.config import Settings, read_config_file, resolve_settings


def write_config(tmp_path, text):
    (tmp_path / "trajvault.toml").write_text(text)
    return str(tmp_path)


def test_defaults_without_sources(tmp_path):
    s = resolve_settings(cwd=str(tmp_path), env={})
    assert s == Settings(cache_dir=None, threads=None)


def test_config_file_only(tmp_path):
    cwd = write_config(tmp_path, "# cache\ncache_dir = /var/cache\nthreads = 3\n")
    s = resolve_settings(cwd=cwd, env={})
    assert s.cache_dir == "/var/cache"
    assert s.threads == 3


def test_env_overrides_config(tmp_path):
    cwd = write_config(tmp_path, "cache_dir = /var/cache\nthreads = 3\n")
    env = {"TRAJVAULT_CACHE_DIR": "/env/cache", "TRAJVAULT_THREADS": "5"}
    s = resolve_settings(cwd=cwd, env=env)
    assert s.cache_dir == "/env/cache"
    assert s.threads == 5


def test_flags_override_everything(tmp_path):
    cwd = write_config(tmp_path, "cache_dir = /var/cache\nthreads = 3\n")
    env = {"TRAJVAULT_CACHE_DIR": "/env/cache", "TRAJVAULT_THREADS": "5"}
    s = resolve_settings(flag_cache_dir="/flag", flag_threads=9, cwd=cwd, env=env)
    assert s.cache_dir == "/flag"
    assert s.threads == 9


def test_quoted_values_and_comments(tmp_path):
    cwd = write_config(tmp_path,
                       '# full line comment\ncache_dir = "/with space"\n\n')
    s = resolve_settings(cwd=cwd, env={})
    assert s.cache_dir == "/with space"


def test_bad_config_line_rejected(tmp_path):
    path = tmp_path / "trajvault.toml"
    path.write_text("cache_dir\n")
    with pytest.raises(ValueError, match=r":1: expected key = value"):
        read_config_file(str(path))


def test_bad_thread_values_rejected(tmp_path):
    with pytest.raises(ValueError):
        resolve_settings(cwd=str(tmp_path), env={"TRAJVAULT_THREADS": "zero"})
    with pytest.raises(ValueError):
        resolve_settings(cwd=str(tmp_path), env={"TRAJVAULT_THREADS": "0"})


def test_unknown_config_keys_ignored(tmp_path):
    cwd = write_config(tmp_path, "future_key = whatever\nthreads = 2\n")
    s = resolve_settings(cwd=cwd, env={})
    assert s.threads == 2 and s.cache_dir is None
