"""Run directory: the only place commands write to.

All writes are atomic (temporary file in the target directory, then
``os.replace``) and confined below the run root.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING

from hearloop._errors import DataError, InvalidPath

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from hearloop._types import PathLike


def normalize_relpath(raw: str) -> str:
    """Canonical ``a/b/c`` form of a run-relative path.

    :raises InvalidPath: On null bytes, ``..`` segments or empty paths.
    """
    if "\0" in raw:
        raise InvalidPath("Path contains null byte", op="normalize", target=raw)
    parts: list[str] = []
    for segment in raw.replace("\\", "/").split("/"):
        if segment in ("", "."):
            continue
        if segment == "..":
            raise InvalidPath("Path contains '..' segment", op="normalize", target=raw)
        parts.append(segment)
    if not parts:
        raise InvalidPath("Path is empty after normalization", op="normalize", target=raw)
    return "/".join(parts)


class RunDir:
    """Output directory of one command invocation.

    :param root: Directory to write into; created if missing.
    :raises DataError: If the directory cannot be created.
    """

    def __init__(self, root: PathLike) -> None:
        try:
            self._root = Path(root).resolve()
            self._root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create run directory: {exc}", op="RunDir", target=str(root)) from None

    def __repr__(self) -> str:
        return f"RunDir(root={str(self._root)!r})"

    @property
    def root(self) -> Path:
        return self._root

    # region: path safety
    def path(self, relpath: str) -> Path:
        """Absolute path of *relpath* inside the run directory.

        ``.resolve()`` follows symlinks, so links pointing outside the root are rejected too.

        :raises InvalidPath: If the path is malformed or escapes the root.
        """
        resolved = (self._root / normalize_relpath(relpath)).resolve()
        try:
            resolved.relative_to(self._root)
        except ValueError:
            raise InvalidPath(f"Path escapes run directory: {relpath}", op="resolve", target=relpath) from None
        return resolved

    def exists(self, relpath: str) -> bool:
        return self.path(relpath).exists()

    # endregion

    # region: writes
    def write_bytes(self, relpath: str, content: bytes) -> Path:
        """Atomically write *content*, replacing any existing file.

        :raises DataError: If the file cannot be written.
        """
        full = self.path(relpath)
        try:
            full.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_path = tempfile.mkstemp(dir=str(full.parent), prefix=f".{full.name}.")
            try:
                with os.fdopen(fd, "wb") as f:
                    f.write(content)
                os.replace(tmp_path, str(full))
            except BaseException:
                if os.path.exists(tmp_path):
                    os.unlink(tmp_path)
                raise
        except OSError as exc:
            raise DataError(f"cannot write {relpath}: {exc}", op="write", target=relpath) from None
        return full

    def write_text(self, relpath: str, text: str) -> Path:
        return self.write_bytes(relpath, text.encode("utf-8"))

    def write_json(self, relpath: str, data: object) -> Path:
        """Pretty-printed JSON with sorted keys and a trailing newline."""
        return self.write_text(relpath, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def write_csv(self, relpath: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return self.write_text(relpath, buf.getvalue())

    # endregion
