"""Dense Matrix Market and signature file I/O.

Only the ``matrix array real general`` flavour is supported.  Values are
written with 17 significant digits, which round-trips every float64.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .sigspaces import Signature, as_matrix

MM_BANNER = "%%MatrixMarket matrix array real general"
SIG_MAGIC = "signature v1"

PathLike = str | os.PathLike


def _lines(path: PathLike):
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise ParseError("file is not ASCII text", path=str(path)) from exc
    return text.splitlines()


def read_matrix(path: PathLike) -> np.ndarray:
    """Read a dense (array format) Matrix Market file.

    Raises:
      ParseError: bad banner, non-dense format, bad size line, wrong entry
        count or an unparsable value; the message names the line.
    """
    p = str(path)
    lines = _lines(path)
    if not lines:
        raise ParseError("empty file", line=1, path=p)
    head = lines[0].strip().split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise ParseError(f"expected '{MM_BANNER}', got {lines[0].strip()!r}", line=1, path=p)
    fmt, field, sym = (h.lower() for h in head[2:])
    if fmt == "coordinate":
        raise ParseError("coordinate (sparse) format is not supported; write the matrix "
                         "in dense 'array' format", line=1, path=p)
    if fmt != "array":
        raise ParseError(f"unknown storage format {fmt!r}", line=1, path=p)
    if field not in ("real", "double", "integer"):
        raise ParseError(f"unsupported field {field!r}; only real is accepted", line=1, path=p)
    if sym != "general":
        raise ParseError(f"unsupported symmetry {sym!r}; only general is accepted", line=1, path=p)

    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", line=len(lines) + 1, path=p)
    lineno, size = body[0]
    parts = size.split()
    try:
        if len(parts) != 2:
            raise ValueError
        m, n = int(parts[0]), int(parts[1])
        if m < 0 or n < 0:
            raise ValueError
    except ValueError:
        raise ParseError(f"size line must hold two nonnegative integers, got {size!r}",
                         line=lineno, path=p) from None
    values = []
    for lineno, ln in body[1:]:
        for tok in ln.split():
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"cannot parse value {tok!r}", line=lineno, path=p) from None
            if not np.isfinite(v):
                raise ParseError(f"non-finite value {tok!r}", line=lineno, path=p)
            values.append(v)
            if len(values) > m * n:
                raise ParseError(f"more than {m * n} entries for a {m}x{n} matrix",
                                 line=lineno, path=p)
    if len(values) != m * n:
        raise ParseError(f"expected {m * n} entries for a {m}x{n} matrix, found {len(values)}",
                         line=len(lines), path=p)
    # array format is column-major
    return np.array(values, dtype=float).reshape((n, m)).T.copy()


def format_matrix(A) -> str:
    A = as_matrix(A)
    m, n = A.shape
    out = [MM_BANNER, f"{m} {n}"]
    out.extend(f"{v:.17g}" for v in A.T.ravel())
    return "\n".join(out) + "\n"


def write_matrix(path: PathLike, A) -> None:
    Path(path).write_text(format_matrix(A), encoding="ascii")


def format_signature(sig: Signature) -> str:
    toks = " ".join("+1" if s > 0 else "-1" for s in sig.signs)
    return f"{SIG_MAGIC}\n{len(sig)}\n{toks}\n"


def write_signature(path: PathLike, sig: Signature) -> None:
    Path(path).write_text(format_signature(sig), encoding="ascii")


def read_signature(path: PathLike) -> Signature:
    p = str(path)
    lines = [ln.strip() for ln in _lines(path)]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or lines[0] != SIG_MAGIC:
        raise ParseError(f"first line must be {SIG_MAGIC!r}", line=1, path=p)
    if len(lines) < 2:
        raise ParseError("missing size line", line=2, path=p)
    try:
        n = int(lines[1])
        if n < 0:
            raise ValueError
    except ValueError:
        raise ParseError(f"size must be a nonnegative integer, got {lines[1]!r}",
                         line=2, path=p) from None
    toks = lines[2].split() if len(lines) > 2 else []
    if len(lines) > 3:
        raise ParseError("unexpected content after the sign line", line=4, path=p)
    if len(toks) != n:
        raise ParseError(f"expected {n} signs, found {len(toks)}", line=3, path=p)
    signs = []
    for t in toks:
        if t not in ("+1", "-1", "1"):
            raise ParseError(f"sign must be +1 or -1, got {t!r}", line=3, path=p)
        signs.append(-1.0 if t == "-1" else 1.0)
    return Signature(np.array(signs))


def parse_signature_spec(spec: str) -> Signature:
    """Inline ``p,q`` meaning ``diag(I_p, -I_q)``, or a signature file path."""
    text = spec.strip()
    parts = text.split(",")
    if len(parts) == 2 and all(s.strip().lstrip("+").isdigit() for s in parts):
        return Signature.from_counts(int(parts[0]), int(parts[1]))
    if not Path(text).is_file():
        raise DomainError(f"signature {spec!r} is neither 'p,q' nor a readable file")
    return read_signature(text)
