import csv

import pytest

from raidnc.cli import EXIT_CONFIG, EXIT_INCOMPLETE, EXIT_IO, EXIT_OK, main
from raidnc.config import ConfigError, load_config, parse_config
from raidnc.sim import CSV_COLUMNS, EpisodeConfig


TABLE_STYLE = """
# channel as written in a parameter table
tx_power_dbm_per_hz = -42.60 dBm/Hz
noise_dbm_per_hz = -168.60 dBm/Hz
bandwidth_hz = 10 MHz
cell_diameter_m = 0.5 km
sinr_gap_db = 0 dB   ; inline comment
shadowing_std_db = 8
msg_size_bits = 2 Mbit
users = 7
scheduler = unicast
erasure_kind = offset
eps0 = 0.1
"""


def test_table_style_units():
    cfg = parse_config(TABLE_STYLE)
    assert cfg.channel.tx_power_dbm_per_hz == -42.6
    assert cfg.channel.bandwidth_hz == 10e6
    assert cfg.channel.cell_diameter_m == 500.0
    assert cfg.channel.shadowing_std_db == 8.0
    assert cfg.msg_size_bits == 2e6
    assert cfg.users == 7 and cfg.scheduler == "unicast"
    assert cfg.erasure.kind == "offset" and cfg.erasure.eps0 == 0.1


def test_base_is_kept():
    base = EpisodeConfig(users=3, messages=9)
    cfg = parse_config("messages = 4", base)
    assert (cfg.users, cfg.messages) == (3, 4)
    assert parse_config("").channel == base.channel


@pytest.mark.parametrize(
    "text",
    [
        "bandwidth = 10",
        "bandwidth_hz = 10 meters",
        "users = 2.5",
        "users = many",
        "bandwidth_hz = 1 2 3",
        "scheduler = nope",
        "fading_kind = rician",
        "eps0 = 2",
        "no equals sign here",
    ],
)
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("users = 4\n")
    assert load_config(path).users == 4
    with pytest.raises(OSError, match="missing.ini"):
        load_config(tmp_path / "missing.ini")


def test_cli_run(tmp_path, capsys):
    out = tmp_path / "row.csv"
    code = main(["run", "--users", "3", "--messages", "4", "--scheduler", "ra_idnc", "--seed", "2", "--csv", str(out)])
    assert code == EXIT_OK
    printed = capsys.readouterr().out.strip()
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and lines[1] == printed
    main(["run", "--users", "3", "--messages", "4", "--scheduler", "ra_idnc", "--seed", "2"])
    assert capsys.readouterr().out.strip() == printed


def test_cli_run_incomplete(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("max_transmissions = 2\n")
    assert main(["run", "--users", "3", "--messages", "3", "--scheduler", "unicast", "--config", str(cfg)]) == EXIT_INCOMPLETE


def test_cli_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("colour = blue\n")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "none.ini")]) == EXIT_IO
    assert main(["run", "--users", "0"]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scheduler", "nope"])
    assert exc.value.code == 2


def test_cli_sweep(tmp_path):
    out = tmp_path / "res"
    code = main(
        [
            "sweep",
            "--axis", "users", "--values", "2,3",
            "--axis", "messages", "--values", "2",
            "--seeds", "2",
            "--schemes", "broadcast,ra_idnc",
            "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    with (out / "users.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 2 * 2
    assert (out / "plot_users.py").exists() and (out / "messages.csv").exists()
    assert main(["sweep", "--axis", "users", "--values", "2", "--axis", "messages", "--out", str(out)]) == EXIT_CONFIG


def test_cli_verify(capsys):
    assert main(["verify", "--trials", "30", "--bijection-trials", "10"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all(line.startswith("PASS") for line in lines)
