"""Source file access for the code preview, jailed to a user-supplied root.

Profiles record build-time paths; the viewer maps them onto a local
checkout via an optional prefix strip plus a root directory. Resolution
is purely lexical and can never escape the root.
"""

from __future__ import annotations

import posixpath
from dataclasses import dataclass
from pathlib import Path

MAX_SOURCE_BYTES = 4 << 20

ESCAPES_ROOT = "EscapesRoot"
NOT_FOUND = "NotFound"
NOT_A_FILE = "NotAFile"
TOO_LARGE = "TooLarge"


class ResolveError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class SourceRoot:
    root_path: Path
    allow_absolute: bool = False
    path_strip: str | None = None  # prefix removed from recorded paths


def resolve(root: SourceRoot, file: str) -> Path:
    """Canonical on-disk path for a recorded file path.

    Raises EscapesRoot for any input that would leave root_path after
    lexical normalization, NotFound / NotAFile otherwise.
    """
    if not file:
        raise ResolveError(NOT_FOUND, "empty path")
    if root.path_strip and file.startswith(root.path_strip):
        file = file[len(root.path_strip):]
    if file.startswith("/") and root.allow_absolute:
        candidate = Path(posixpath.normpath(file))
    else:
        # Absolute inputs are reinterpreted relative to the root.
        rel = posixpath.normpath(file.lstrip("/"))
        if rel == ".." or rel.startswith("../"):
            raise ResolveError(ESCAPES_ROOT, f"{file!r} escapes the source root")
        base = posixpath.normpath(str(root.root_path))
        candidate = Path(posixpath.join(base, rel))
        if not (str(candidate) == base or str(candidate).startswith(base.rstrip("/") + "/")):
            raise ResolveError(ESCAPES_ROOT, f"{file!r} escapes the source root")
    try:
        if not candidate.exists():
            raise ResolveError(NOT_FOUND, f"{file!r} not found under the source root")
        if not candidate.is_file():
            raise ResolveError(NOT_A_FILE, f"{file!r} is not a regular file")
    except (OSError, ValueError):  # unstatable names, embedded NULs
        raise ResolveError(NOT_FOUND, f"{file!r} not found under the source root") from None
    return candidate


def fetch(path: Path) -> tuple[list[str], int, bool]:
    """(lines, line_count, lossy) for a resolved path; 4 MiB cap.

    Non-UTF-8 bytes are replaced and flagged via lossy=True.
    """
    size = path.stat().st_size
    if size > MAX_SOURCE_BYTES:
        raise ResolveError(TOO_LARGE, f"{path} is {size} bytes (cap {MAX_SOURCE_BYTES})")
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
        lossy = False
    except UnicodeDecodeError:
        text = data.decode("utf-8", errors="replace")
        lossy = True
    lines = text.splitlines()
    return lines, len(lines), lossy
