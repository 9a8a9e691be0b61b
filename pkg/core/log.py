# core/log.py

import datetime

from rich.console import Console

console = Console(highlight=False)
_quiet = False


def set_quiet(quiet: bool) -> None:
    global _quiet
    _quiet = quiet


def log(stage: str, msg: str):
    """Simple timestamped console logger."""
    if _quiet:
        return
    now = datetime.datetime.now().strftime("%H:%M:%S")
    console.print(f"[{now}] [{stage}] {msg}", markup=False)


def is_quiet() -> bool:
    return _quiet
