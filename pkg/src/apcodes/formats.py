"""Plain-text file formats.

* code file: header ``q n k``, then one codeword per line in message order;
* permutation-matrix file: header ``q k n``, then ``k * n`` image arrays,
  row-major;
* table-ensemble file: one image array per line.

Blank lines and lines starting with ``#`` are ignored everywhere.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .alphabet import Permutation
from .apcode import CodeMultiset, PermMatrix
from .errors import ValidationError


def _data_lines(path) -> list[tuple[int, list[int]]]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append((lineno, [int(tok) for tok in line.split()]))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: non-integer token") from exc
    return out


def read_table_file(path) -> list[Permutation]:
    perms = []
    for lineno, values in _data_lines(path):
        try:
            perms.append(Permutation(values))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    if not perms:
        raise ValidationError(f"{path}: no permutations found")
    return perms


def write_table_file(perms, path) -> None:
    with open(path, "w") as fh:
        for p in perms:
            fh.write(" ".join(map(str, p.tolist())) + "\n")


def write_code(C: CodeMultiset, path) -> None:
    if C.k is None:
        raise ValidationError("only codes with a recorded k (2^k words) can be written")
    with open(path, "w") as fh:
        fh.write(f"{C.q} {C.n} {C.k}\n")
        for w in C.words.tolist():
            fh.write(" ".join(map(str, w)) + "\n")


def read_code(path) -> CodeMultiset:
    lines = _data_lines(path)
    if not lines or len(lines[0][1]) != 3:
        raise ValidationError(f"{path}: expected a header 'q n k'")
    q, n, k = lines[0][1]
    rows = lines[1:]
    if len(rows) != 1 << k:
        raise ValidationError(f"{path}: header says k={k} ({1 << k} words), found {len(rows)}")
    for lineno, values in rows:
        if len(values) != n:
            raise ValidationError(f"{path}:{lineno}: expected {n} symbols, got {len(values)}")
    words = np.array([v for _, v in rows], dtype=np.int64).reshape(len(rows), n)
    try:
        return CodeMultiset(words, q, k)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_matrix(Pi: PermMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{Pi.q} {Pi.k} {Pi.n}\n")
        for i in range(Pi.k):
            for j in range(Pi.n):
                fh.write(" ".join(map(str, Pi.images[i, j].tolist())) + "\n")


def read_matrix(path) -> PermMatrix:
    lines = _data_lines(path)
    if not lines or len(lines[0][1]) != 3:
        raise ValidationError(f"{path}: expected a header 'q k n'")
    q, k, n = lines[0][1]
    rows = lines[1:]
    if len(rows) != k * n:
        raise ValidationError(f"{path}: expected {k * n} image arrays, found {len(rows)}")
    for lineno, values in rows:
        if len(values) != q:
            raise ValidationError(f"{path}:{lineno}: expected {q} images, got {len(values)}")
    try:
        return PermMatrix(np.array([v for _, v in rows]).reshape(k, n, q))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def ensure_parent(path) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    return path
