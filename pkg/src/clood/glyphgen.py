"""Procedural glyph rendering from fully controlled latent factors.

Images are 32x32 grayscale, drawn from 10 hand-authored stroke skeletons
(digit-like shapes) styled by 10 parametric font bundles (stroke width,
slant, corner roundness, serifs, aspect). Every pixel is a pure function
of a LatentSpec, so datasets are reproducible bit-for-bit from a seed.

Rendering path: skeleton polylines -> corner smoothing -> serifs ->
aspect/slant -> scale/rotate/translate -> thick-stroke rasterization on
a 4x supersampled grid -> box-filter downsample -> intensity mapping ->
additive uniform pixel noise from a dedicated per-image PRNG stream.
"""

import hashlib
import json
import math
import struct
from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np

from .rng import make_rng

IMAGE_SIZE = 32
SUPERSAMPLE = 4
SUB = IMAGE_SIZE * SUPERSAMPLE
NUM_CHARS = 10
NUM_FONTS = 10

MAGIC = b"CLOOD1"
CONTAINER_VERSION = 1


# ---------------------------------------------------------------------------
# skeletons


def _arc(cx, cy, rx, ry, a0, a1, n=12):
    t = np.linspace(a0, a1, n)
    return np.stack([cx + rx * np.cos(t), cy + ry * np.sin(t)], axis=1)


def _poly(*pts):
    return np.asarray(pts, dtype=float)


@dataclass(frozen=True)
class GlyphSkeleton:
    char_id: int
    strokes: tuple  # tuple of (N,2) float arrays, unit-square coords


def _build_skeletons():
    # y grows downward, matching image rows; glyphs live in [0.18, 0.84]
    pi = math.pi
    s = {}
    s[0] = [_arc(0.5, 0.5, 0.21, 0.30, 0, 2 * pi, 17)]
    s[1] = [
        _poly((0.34, 0.34), (0.54, 0.19), (0.54, 0.82)),
        _poly((0.36, 0.82), (0.72, 0.82)),
    ]
    s[2] = [
        np.concatenate(
            [
                _arc(0.5, 0.36, 0.2, 0.17, pi, 2 * pi, 9),
                _poly((0.68, 0.42), (0.31, 0.8), (0.72, 0.8)),
            ]
        )
    ]
    s[3] = [
        _arc(0.44, 0.35, 0.21, 0.16, 1.25 * pi, 2.55 * pi, 10),
        _arc(0.44, 0.65, 0.23, 0.17, 1.45 * pi, 2.75 * pi, 10),
    ]
    s[4] = [
        _poly((0.6, 0.19), (0.3, 0.6), (0.76, 0.6)),
        _poly((0.62, 0.4), (0.62, 0.82)),
    ]
    s[5] = [
        _poly((0.7, 0.2), (0.36, 0.2), (0.34, 0.47)),
        np.concatenate(
            [
                _poly((0.34, 0.47), (0.45, 0.44)),
                _arc(0.47, 0.62, 0.22, 0.19, 1.5 * pi, 2.7 * pi, 10),
            ]
        ),
    ]
    s[6] = [
        _arc(0.48, 0.63, 0.2, 0.18, 0, 2 * pi, 15),
        _poly((0.64, 0.2), (0.44, 0.42), (0.32, 0.6)),
    ]
    s[7] = [
        _poly((0.3, 0.21), (0.72, 0.21), (0.44, 0.82)),
        _poly((0.38, 0.52), (0.64, 0.52)),
    ]
    s[8] = [
        _arc(0.5, 0.34, 0.165, 0.145, 0, 2 * pi, 13),
        _arc(0.5, 0.66, 0.2, 0.17, 0, 2 * pi, 15),
    ]
    s[9] = [
        _arc(0.52, 0.38, 0.195, 0.17, 0, 2 * pi, 15),
        _poly((0.715, 0.38), (0.68, 0.62), (0.5, 0.82)),
    ]
    return {
        c: GlyphSkeleton(c, tuple(np.asarray(p, dtype=float) for p in strokes))
        for c, strokes in s.items()
    }


SKELETONS = _build_skeletons()


# ---------------------------------------------------------------------------
# font styles


@dataclass(frozen=True)
class FontStyle:
    font_id: int
    stroke_width: float  # fraction of image width
    slant: float  # radians, shear about the glyph midline
    roundness: float  # 0 = sharp corners, 1 = maximal corner cutting
    serif: bool
    aspect: float  # horizontal scale factor


FONT_STYLES = (
    FontStyle(0, 0.085, 0.00, 0.00, False, 1.00),
    FontStyle(1, 0.150, 0.00, 0.20, False, 1.00),
    FontStyle(2, 0.085, 0.30, 0.20, False, 1.02),
    FontStyle(3, 0.105, 0.00, 0.00, True, 1.00),
    FontStyle(4, 0.105, 0.00, 0.90, False, 1.05),
    FontStyle(5, 0.095, 0.00, 0.00, False, 0.72),
    FontStyle(6, 0.115, 0.00, 0.30, False, 1.28),
    FontStyle(7, 0.160, -0.20, 0.50, False, 0.90),
    FontStyle(8, 0.070, 0.12, 0.00, True, 1.10),
    FontStyle(9, 0.125, 0.16, 0.70, True, 0.85),
)


# ---------------------------------------------------------------------------
# latent specs


@dataclass(frozen=True)
class LatentSpec:
    char_id: int
    font_id: int
    translate: tuple  # (tx, ty), fractions of image size
    scale: float  # in [0.6, 1.0]
    rotation: float  # radians
    fg_intensity: float
    bg_intensity: float
    noise_seed: int
    noise_amp: float


SCALE_RANGE = (0.6, 1.0)
ROTATION_MAX = 0.22
CONTRAST_RANGE = (0.35, 0.9)
NOISE_AMP_RANGE = (0.01, 0.08)
TRANSLATE_CAP = 0.15


def _check_ids(char_id, font_id):
    if not (0 <= int(char_id) < NUM_CHARS):
        raise ValueError(f"char_id out of range [0,{NUM_CHARS}): {char_id}")
    if not (0 <= int(font_id) < NUM_FONTS):
        raise ValueError(f"font_id out of range [0,{NUM_FONTS}): {font_id}")


def sample_latents(rng, char_id, font_id):
    """Draw nuisance factors for one image from `rng` (a numpy Generator).

    The translate range is computed from the styled glyph's bounding box so
    the glyph, including stroke girth, always stays inside the image.
    """
    _check_ids(char_id, font_id)
    scale = float(rng.uniform(*SCALE_RANGE))
    rotation = float(rng.uniform(-ROTATION_MAX, ROTATION_MAX))

    style = FONT_STYLES[font_id]
    pts = np.concatenate(_styled_strokes(char_id, font_id))
    placed = _place(pts, scale, rotation, (0.0, 0.0))
    margin = style.stroke_width / 2 + 1.5 / IMAGE_SIZE
    lo = margin - placed.min(axis=0)
    hi = (1.0 - margin) - placed.max(axis=0)
    translate = []
    for axis in range(2):
        a = max(lo[axis], -TRANSLATE_CAP)
        b = min(hi[axis], TRANSLATE_CAP)
        if a > b:  # oversized glyph: center it instead of sampling
            translate.append(float((lo[axis] + hi[axis]) / 2))
        else:
            translate.append(float(rng.uniform(a, b)))

    contrast = float(rng.uniform(*CONTRAST_RANGE))
    if rng.random() < 0.5:
        bg = float(rng.uniform(0.0, 1.0 - contrast))
        fg = bg + contrast
    else:
        bg = float(rng.uniform(contrast, 1.0))
        fg = bg - contrast
    noise_amp = float(rng.uniform(*NOISE_AMP_RANGE))
    noise_seed = int(rng.integers(0, 2**64, dtype=np.uint64))

    return LatentSpec(
        char_id=int(char_id),
        font_id=int(font_id),
        translate=(translate[0], translate[1]),
        scale=scale,
        rotation=rotation,
        fg_intensity=fg,
        bg_intensity=bg,
        noise_seed=noise_seed,
        noise_amp=noise_amp,
    )


# ---------------------------------------------------------------------------
# styling and placement


def _chaikin(pts, cut):
    """One corner-cutting pass; endpoints stay fixed, closed loops wrap."""
    closed = np.allclose(pts[0], pts[-1])
    if closed:
        ring = pts[:-1]
        n = len(ring)
        out = []
        for i in range(n):
            p, q = ring[i], ring[(i + 1) % n]
            out.append(p + cut * (q - p))
            out.append(p + (1 - cut) * (q - p))
        out.append(out[0])
        return np.asarray(out)
    out = [pts[0]]
    for i in range(len(pts) - 1):
        p, q = pts[i], pts[i + 1]
        if i > 0:
            out.append(p + cut * (q - p))
        if i < len(pts) - 2:
            out.append(p + (1 - cut) * (q - p))
    out.append(pts[-1])
    return np.asarray(out)


def _serif_bars(strokes, width):
    """Perpendicular bars at the free ends of open strokes."""
    half = 1.3 * width
    bars = []
    for pts in strokes:
        if np.allclose(pts[0], pts[-1]):
            continue
        for end, nxt in ((pts[0], pts[1]), (pts[-1], pts[-2])):
            d = nxt - end
            norm = math.hypot(d[0], d[1])
            if norm < 1e-9:
                continue
            perp = np.array([-d[1] / norm, d[0] / norm])
            bars.append(np.stack([end - half * perp, end + half * perp]))
    return bars


@lru_cache(maxsize=None)
def _styled_strokes_cached(char_id, font_id):
    skel = SKELETONS[char_id]
    style = FONT_STYLES[font_id]
    strokes = [np.array(p) for p in skel.strokes]
    if style.roundness > 0:
        cut = 0.25 * style.roundness
        strokes = [_chaikin(_chaikin(p, cut), cut) for p in strokes]
    if style.serif:
        strokes = strokes + _serif_bars(strokes, style.stroke_width)
    shear = math.tan(style.slant)
    out = []
    for pts in strokes:
        x = 0.5 + (pts[:, 0] - 0.5) * style.aspect
        x = x + shear * (0.5 - pts[:, 1])
        out.append(np.ascontiguousarray(np.stack([x, pts[:, 1]], axis=1)))
    return tuple(out)


def _styled_strokes(char_id, font_id):
    return _styled_strokes_cached(int(char_id), int(font_id))


def _place(pts, scale, rotation, translate):
    c, s = math.cos(rotation), math.sin(rotation)
    rel = (pts - 0.5) * scale
    x = rel[:, 0] * c - rel[:, 1] * s + 0.5 + translate[0]
    y = rel[:, 0] * s + rel[:, 1] * c + 0.5 + translate[1]
    return np.stack([x, y], axis=1)


# ---------------------------------------------------------------------------
# rasterization


def _coverage(spec):
    """Boolean stroke coverage on the supersampled grid, then box-filtered."""
    style = FONT_STYLES[spec.font_id]
    half = style.stroke_width * SUB / 2.0
    cov = np.zeros((SUB, SUB), dtype=bool)
    for pts in _styled_strokes(spec.char_id, spec.font_id):
        seg = _place(pts, spec.scale, spec.rotation, spec.translate) * SUB
        for i in range(len(seg) - 1):
            _stamp_segment(cov, seg[i], seg[i + 1], half)
    return cov.reshape(IMAGE_SIZE, SUPERSAMPLE, IMAGE_SIZE, SUPERSAMPLE).mean(
        axis=(1, 3)
    )


def _stamp_segment(cov, p, q, half):
    x0 = max(int(math.floor(min(p[0], q[0]) - half - 1)), 0)
    x1 = min(int(math.ceil(max(p[0], q[0]) + half + 1)), SUB - 1)
    y0 = max(int(math.floor(min(p[1], q[1]) - half - 1)), 0)
    y1 = min(int(math.ceil(max(p[1], q[1]) + half + 1)), SUB - 1)
    if x0 > x1 or y0 > y1:
        return
    xs = np.arange(x0, x1 + 1) + 0.5
    ys = np.arange(y0, y1 + 1) + 0.5
    dx = q[0] - p[0]
    dy = q[1] - p[1]
    l2 = dx * dx + dy * dy
    gx = xs[None, :] - p[0]
    gy = ys[:, None] - p[1]
    if l2 < 1e-12:
        d2 = gx * gx + gy * gy
    else:
        t = np.clip((gx * dx + gy * dy) / l2, 0.0, 1.0)
        ex = gx - t * dx
        ey = gy - t * dy
        d2 = ex * ex + ey * ey
    cov[y0 : y1 + 1, x0 : x1 + 1] |= d2 <= half * half


def render(spec):
    """Render a LatentSpec to a (32, 32, 1) float32 image in [0, 1]."""
    _check_ids(spec.char_id, spec.font_id)
    cov = _coverage(spec)
    img = spec.bg_intensity + cov * (spec.fg_intensity - spec.bg_intensity)
    if spec.noise_amp > 0:
        noise_rng = np.random.Generator(np.random.PCG64(int(spec.noise_seed)))
        img = img + spec.noise_amp * noise_rng.uniform(
            -1.0, 1.0, size=(IMAGE_SIZE, IMAGE_SIZE)
        )
    img = np.clip(img, 0.0, 1.0)
    return img.astype(np.float32)[:, :, None]


# ---------------------------------------------------------------------------
# datasets


@dataclass
class Dataset:
    images: np.ndarray  # (N, 32, 32, 1) float32
    char_ids: np.ndarray  # (N,) uint8
    font_ids: np.ndarray  # (N,) uint8
    seed: int
    per_cell: np.ndarray  # (10, 10) int64 counts, [char, font]

    def __len__(self):
        return len(self.images)


def _normalize_per_cell(config):
    if isinstance(config, (int, np.integer)):
        counts = np.full((NUM_CHARS, NUM_FONTS), int(config), dtype=np.int64)
    else:
        counts = np.asarray(config, dtype=np.int64)
        if counts.shape != (NUM_CHARS, NUM_FONTS):
            raise ValueError(
                f"per-cell counts must be scalar or shape (10, 10), got {counts.shape}"
            )
    if np.any(counts <= 0):
        raise ValueError("per-cell counts must be positive")
    return counts


def render_dataset(config, seed):
    """Render a labeled dataset with `config` examples per (char, font) cell.

    `config` is a positive int (uniform cells) or a (10, 10) count array.
    Order and content are fully determined by `seed`.
    """
    counts = _normalize_per_cell(config)
    n = int(counts.sum())
    images = np.empty((n, IMAGE_SIZE, IMAGE_SIZE, 1), dtype=np.float32)
    char_ids = np.empty(n, dtype=np.uint8)
    font_ids = np.empty(n, dtype=np.uint8)
    k = 0
    for c in range(NUM_CHARS):
        for f in range(NUM_FONTS):
            for i in range(counts[c, f]):
                spec = sample_latents(make_rng(seed, "glyphs", c, f, i), c, f)
                images[k] = render(spec)
                char_ids[k] = c
                font_ids[k] = f
                k += 1
    return Dataset(images, char_ids, font_ids, int(seed), counts)


def config_hash(config, seed):
    counts = _normalize_per_cell(config)
    payload = json.dumps(
        {"per_cell": counts.tolist(), "seed": int(seed)}, sort_keys=True
    )
    return hashlib.sha256(payload.encode()).hexdigest()


# ---------------------------------------------------------------------------
# container serialization: magic "CLOOD1", little-endian, + JSON sidecar


def save_dataset(path, dataset):
    """Write the binary container and its JSON sidecar; returns container hash."""
    path = str(path)
    images = np.ascontiguousarray(dataset.images, dtype="<f4")
    n = len(dataset)
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<BBIHHB", CONTAINER_VERSION, 1, n, IMAGE_SIZE, IMAGE_SIZE, 1)
    blob += images.tobytes()
    labels = np.stack([dataset.char_ids, dataset.font_ids], axis=1).astype(np.uint8)
    blob += labels.tobytes()
    with open(path, "wb") as fh:
        fh.write(blob)
    digest = hashlib.sha256(blob).hexdigest()
    sidecar = {
        "count": n,
        "seed": dataset.seed,
        "per_cell": dataset.per_cell.tolist(),
        "config_hash": config_hash(dataset.per_cell, dataset.seed),
        "container_sha256": digest,
    }
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return digest


def load_dataset(path):
    path = str(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:6] != MAGIC:
        raise ValueError(f"not a CLOOD1 container: {path}")
    version, dtype_code, n, h, w, c = struct.unpack_from("<BBIHHB", blob, 6)
    if version != CONTAINER_VERSION or dtype_code != 1:
        raise ValueError(f"unsupported container version/dtype in {path}")
    off = 6 + struct.calcsize("<BBIHHB")
    img_bytes = n * h * w * c * 4
    images = (
        np.frombuffer(blob, dtype="<f4", count=n * h * w * c, offset=off)
        .reshape(n, h, w, c)
        .copy()
    )
    labels = np.frombuffer(blob, dtype=np.uint8, count=n * 2, offset=off + img_bytes)
    labels = labels.reshape(n, 2)
    with open(path + ".json") as fh:
        sidecar = json.load(fh)
    per_cell = np.asarray(sidecar["per_cell"], dtype=np.int64)
    return Dataset(
        images, labels[:, 0].copy(), labels[:, 1].copy(), int(sidecar["seed"]), per_cell
    )


def dataset_hash(path):
    with open(str(path), "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def export_pngs(dataset, indices, out_dir):
    """Debug PNG dump of selected examples, named idx_char_font.png."""
    from PIL import Image
    import os

    os.makedirs(str(out_dir), exist_ok=True)
    paths = []
    for i in indices:
        arr = np.round(dataset.images[i, :, :, 0] * 255.0).astype(np.uint8)
        name = f"{i:06d}_c{dataset.char_ids[i]}_f{dataset.font_ids[i]}.png"
        p = os.path.join(str(out_dir), name)
        Image.fromarray(arr, mode="L").save(p)
        paths.append(p)
    return paths


def spec_to_dict(spec):
    return asdict(spec)
