"""Structured key=value logging on standard error"""
import sys

from loguru import logger

_RESERVED = ("ts", "level", "event")


def _quote(value) -> str:
    text = str(value)
    if text == "" or any(ch in text for ch in ' ="\t\n'):
        text = '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    return text


def format_record(record) -> str:
    """Render a loguru record as a single key=value line"""
    fields = {
        "ts": record["time"].strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3],
        "level": record["level"].name,
        "event": record["message"],
    }
    for key, value in record["extra"].items():
        if key in _RESERVED:
            key = f"extra_{key}"
        fields[key] = value
    return " ".join(f"{k}={_quote(v)}" for k, v in fields.items())


def _stderr_sink(message):
    sys.stderr.write(format_record(message.record) + "\n")


def configure_logging(level: str = "WARNING") -> None:
    """Send all log records to standard error as key=value lines"""
    logger.remove()
    logger.enable("miscluster")
    logger.add(_stderr_sink, level=level.upper())
