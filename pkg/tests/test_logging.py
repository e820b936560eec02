from loguru import logger

from commands.common import run_stage
from config import settings
from core.logging import configure_logging, stage_context


def logged_lines(monkeypatch, tmp_path, emit) -> list[str]:
    log_file = tmp_path / "run.log"
    monkeypatch.setattr(settings, "LOG_FILE", str(log_file))
    configure_logging("DEBUG", command="reproduce")
    emit()
    # closes the file sink
    logger.remove()
    return log_file.read_text().splitlines()


def test_records_carry_command_and_stage(monkeypatch, tmp_path):
    def emit():
        logger.info("before")
        with stage_context("dataset"):
            logger.info("inside")
        logger.info("after")

    lines = logged_lines(monkeypatch, tmp_path, emit)
    tagged = {line.rsplit(" - ", 1)[1]: line for line in lines}

    assert "| reproduce/- |" in tagged["before"]
    assert "| reproduce/dataset |" in tagged["inside"]
    assert "| reproduce/- |" in tagged["after"]


def test_stage_build_is_tagged_with_stage(monkeypatch, tmp_path):
    output = tmp_path / "map.tmap"

    def build():
        logger.info("building map")
        output.write_bytes(b"map")
        return [output]

    lines = logged_lines(monkeypatch, tmp_path, lambda: run_stage("map", output, [], {}, build))

    assert any("| reproduce/map |" in line and line.endswith("building map") for line in lines)
