"""Matrix file formats: MatrixMarket (array and coordinate, real) and PGM
images (ASCII P2 and binary P5, up to 16-bit).

Loaders validate structure and reject non-finite values; parse errors carry
1-based line numbers where the format has lines.  Writers round-trip:
MatrixMarket values are printed with 17 significant digits (bitwise-exact
float64 round trip), PGM quantizes [0, 1] data onto the maxval grid.
"""

import numpy as np


class MatrixFormatError(ValueError):
    """Malformed MatrixMarket content."""


class PgmFormatError(ValueError):
    """Malformed PGM content."""


def _mm_error(path, lineno, message):
    raise MatrixFormatError(f"{path}: line {lineno}: {message}")


def load_matrix_market(path):
    """Dense float64 matrix (column-major) from a MatrixMarket file.

    Supports array and coordinate formats with real or integer field and
    general or symmetric symmetry; anything else is rejected.  Coordinate
    duplicates accumulate.
    """
    path = str(path)
    with open(path, "r", encoding="latin-1") as fh:
        lines = fh.read().splitlines()
    if not lines:
        _mm_error(path, 1, "empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        _mm_error(path, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'")
    obj, fmt, fieldname, symmetry = (t.lower() for t in header[1:])
    if obj != "matrix":
        _mm_error(path, 1, f"unsupported object {obj!r}")
    if fmt not in ("array", "coordinate"):
        _mm_error(path, 1, f"unsupported format {fmt!r}")
    if fieldname not in ("real", "integer"):
        _mm_error(path, 1, f"unsupported field {fieldname!r}")
    if symmetry not in ("general", "symmetric"):
        _mm_error(path, 1, f"unsupported symmetry {symmetry!r}")

    body = [
        (i + 1, ln)
        for i, ln in enumerate(lines[1:], start=1)
        if ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        _mm_error(path, len(lines), "missing size line")
    sizeno, sizeline = body[0]
    toks = sizeline.split()
    want = 2 if fmt == "array" else 3
    try:
        dims = [int(t) for t in toks]
    except ValueError:
        dims = []
    if len(toks) != want or len(dims) != want or any(d < 0 for d in dims):
        _mm_error(path, sizeno, f"size line must hold {want} nonnegative integers")
    m, n = dims[0], dims[1]
    if symmetry == "symmetric" and m != n:
        _mm_error(path, sizeno, "symmetric matrices must be square")
    M = np.zeros((m, n), order="F")

    if fmt == "array":
        entries = []
        for lineno, ln in body[1:]:
            for tok in ln.split():
                try:
                    v = float(tok)
                except ValueError:
                    _mm_error(path, lineno, f"bad numeric value {tok!r}")
                if not np.isfinite(v):
                    _mm_error(path, lineno, f"non-finite value {tok!r}")
                entries.append(v)
        if symmetry == "general":
            expected = m * n
        else:
            expected = m * (m + 1) // 2
        if len(entries) != expected:
            _mm_error(
                path,
                body[-1][0] if len(body) > 1 else sizeno,
                f"expected {expected} entries, found {len(entries)}",
            )
        pos = 0
        for j in range(n):
            i0 = j if symmetry == "symmetric" else 0
            for i in range(i0, m):
                M[i, j] = entries[pos]
                if symmetry == "symmetric":
                    M[j, i] = entries[pos]
                pos += 1
    else:
        nnz = dims[2]
        data = body[1:]
        if len(data) != nnz:
            _mm_error(path, sizeno, f"expected {nnz} entries, found {len(data)}")
        for lineno, ln in data:
            toks = ln.split()
            if len(toks) != 3:
                _mm_error(path, lineno, "coordinate entries need 'row col value'")
            try:
                i, j = int(toks[0]), int(toks[1])
                v = float(toks[2])
            except ValueError:
                _mm_error(path, lineno, f"bad coordinate entry {ln.strip()!r}")
            if not (1 <= i <= m and 1 <= j <= n):
                _mm_error(path, lineno, f"index ({i}, {j}) outside {m} x {n}")
            if not np.isfinite(v):
                _mm_error(path, lineno, f"non-finite value {toks[2]!r}")
            M[i - 1, j - 1] += v
            if symmetry == "symmetric" and i != j:
                M[j - 1, i - 1] += v
    return M


def save_matrix_market(M, path):
    """Write a dense real matrix in array/general format, one entry per line,
    column-major, with full float64 precision."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not np.all(np.isfinite(M)):
        raise ValueError("refusing to write non-finite values")
    m, n = M.shape
    with open(str(path), "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{m} {n}\n")
        for j in range(n):
            for i in range(m):
                fh.write(f"{M[i, j]:.17g}\n")


class _PgmScanner:
    """Token reader over raw PGM bytes: whitespace-separated tokens with
    '#'-to-end-of-line comments, position tracked so binary rasters can start
    right after the header."""

    def __init__(self, data, path):
        self.data = data
        self.pos = 0
        self.path = path

    def fail(self, message):
        raise PgmFormatError(f"{self.path}: {message}")

    def token(self):
        d, size = self.data, len(self.data)
        while self.pos < size:
            c = d[self.pos]
            if c in b"#":
                while self.pos < size and d[self.pos] not in b"\n":
                    self.pos += 1
            elif c in b" \t\r\n\x0b\x0c":
                self.pos += 1
            else:
                break
        if self.pos >= size:
            self.fail("unexpected end of header")
        start = self.pos
        while self.pos < size and d[self.pos] not in b" \t\r\n\x0b\x0c#":
            self.pos += 1
        return d[start : self.pos]

    def int_token(self, what):
        tok = self.token()
        try:
            return int(tok)
        except ValueError:
            self.fail(f"bad {what}: {tok!r}")


def load_pgm(path):
    """Grayscale image as float64 in [0, 1], shape (height, width)."""
    path = str(path)
    with open(path, "rb") as fh:
        data = fh.read()
    sc = _PgmScanner(data, path)
    magic = sc.token()
    if magic not in (b"P2", b"P5"):
        sc.fail(f"not a PGM file (magic {magic!r})")
    width = sc.int_token("width")
    height = sc.int_token("height")
    maxval = sc.int_token("maxval")
    if width < 1 or height < 1:
        sc.fail(f"bad dimensions {width} x {height}")
    if not 1 <= maxval <= 65535:
        sc.fail(f"maxval {maxval} outside [1, 65535]")
    count = width * height
    if magic == b"P2":
        toks = data[sc.pos :].split()
        if len(toks) != count:
            sc.fail(f"expected {count} samples, found {len(toks)}")
        try:
            raster = np.array([int(t) for t in toks], dtype=np.int64)
        except ValueError:
            sc.fail("non-integer sample in ASCII raster")
    else:
        sc.pos += 1  # single whitespace byte after maxval
        width_bytes = 2 if maxval > 255 else 1
        raw = data[sc.pos : sc.pos + count * width_bytes]
        if len(raw) != count * width_bytes:
            sc.fail(f"raster truncated: expected {count * width_bytes} bytes, found {len(raw)}")
        dtype = ">u2" if maxval > 255 else np.uint8
        raster = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if raster.min() < 0 or raster.max() > maxval:
        sc.fail(f"sample outside [0, {maxval}]")
    return raster.reshape(height, width).astype(np.float64) / maxval


def save_pgm(M, path, maxval=255, ascii_format=False):
    """Quantize [0, 1] data onto the maxval grid (clamping first) and write
    binary P5 by default, ASCII P2 on request; maxval > 255 uses two
    big-endian bytes per sample."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not 1 <= int(maxval) <= 65535:
        raise ValueError("maxval must lie in [1, 65535]")
    maxval = int(maxval)
    q = np.rint(np.clip(M, 0.0, 1.0) * maxval).astype(np.int64)
    height, width = M.shape
    with open(str(path), "wb") as fh:
        if ascii_format:
            fh.write(f"P2\n{width} {height}\n{maxval}\n".encode("ascii"))
            for row in q:
                fh.write((" ".join(str(v) for v in row) + "\n").encode("ascii"))
        else:
            fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
            dtype = ">u2" if maxval > 255 else np.uint8
            fh.write(q.astype(dtype).tobytes())
