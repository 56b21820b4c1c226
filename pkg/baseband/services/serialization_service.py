"""
Serialization Service — complex matrices as CSV.

One line per matrix row; each entry is an ``re,im`` column pair. Vectors
are written as a single row.
"""

import csv
import io

import numpy as np


class MatrixFormatError(ValueError):
    pass


def write_matrix_csv(matrix, stream):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    if matrix.ndim != 2:
        raise MatrixFormatError(f'Only vectors and matrices can be written (got {matrix.ndim} dims).')
    writer = csv.writer(stream, lineterminator='\n')
    for row in matrix:
        cells = []
        for value in row:
            cells.extend((repr(float(value.real)), repr(float(value.imag))))
        writer.writerow(cells)


def read_matrix_csv(stream) -> np.ndarray:
    rows = []
    for lineno, cells in enumerate(csv.reader(stream), start=1):
        if not cells:
            continue
        if len(cells) % 2:
            raise MatrixFormatError(f'Row {lineno}: odd number of columns, expected re,im pairs.')
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise MatrixFormatError(f'Row {lineno}: non-numeric entry.')
        rows.append([complex(re, im) for re, im in zip(values[::2], values[1::2])])

    if not rows:
        return np.zeros((0, 0), dtype=complex)
    if len({len(r) for r in rows}) != 1:
        raise MatrixFormatError('Rows have different lengths.')
    return np.array(rows, dtype=complex)


def matrix_to_csv(matrix) -> str:
    buffer = io.StringIO()
    write_matrix_csv(matrix, buffer)
    return buffer.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    return read_matrix_csv(io.StringIO(text))
