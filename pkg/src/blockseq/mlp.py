"""Fully connected sequencer: five weight layers, ReLU hidden units, sigmoid
outputs, trained as a multi-label classifier with binary cross-entropy and
Adam.  Inputs are the 80-bit (source, target) encoding; outputs the 128-bit
sequence encoding.  Backprop is written out by hand so it can be checked
against finite differences.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import PairRecord
from .model import (
    Configuration,
    MoveSequence,
    config_bits,
    decode_sequence,
    encode_sequence,
)

LAYER_WIDTHS = (80, 512, 512, 256, 256, 128)
CLIP_EPS = 1e-7
_MAGIC = b"BSQM"
_VERSION = 1


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def copy(self) -> "MlpModel":
        return MlpModel([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_model(widths: Sequence[int] = LAYER_WIDTHS, seed: int = 0) -> MlpModel:
    """Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fi, fo in zip(widths, widths[1:]):
        limit = np.sqrt(6.0 / (fi + fo))
        weights.append(rng.uniform(-limit, limit, size=(fi, fo)))
        biases.append(np.zeros(fo))
    return MlpModel(weights, biases)


def encode_pair(src: Configuration, tgt: Configuration) -> np.ndarray:
    """80-entry input: arrangement+color bits of the source, then the target."""
    return np.concatenate([config_bits(src), config_bits(tgt)]).astype(np.float64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_full(model: MlpModel, x: np.ndarray):
    """Returns (activations, pre-activations); activations[0] is the input."""
    acts = [x]
    pres = []
    h = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pres.append(z)
        h = _sigmoid(z) if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts, pres


def forward(model: MlpModel, x) -> np.ndarray:
    """Sigmoid outputs in (0,1); accepts one input vector or a batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    acts, _ = _forward_full(model, x[None, :] if single else x)
    out = acts[-1]
    return out[0] if single else out


def bce_loss(pred, truth) -> float:
    """Mean binary cross-entropy over all positions (predictions clipped)."""
    p = np.clip(np.asarray(pred, dtype=np.float64), CLIP_EPS, 1.0 - CLIP_EPS)
    y = np.asarray(truth, dtype=np.float64)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def _gradients(model: MlpModel, x: np.ndarray, y: np.ndarray):
    """Loss and parameter gradients for a batch (loss = mean over batch x bits)."""
    acts, pres = _forward_full(model, x)
    p = acts[-1]
    clipped = np.clip(p, CLIP_EPS, 1.0 - CLIP_EPS)
    loss = float(np.mean(-(y * np.log(clipped) + (1.0 - y) * np.log(1.0 - clipped))))
    n = x.shape[0] * y.shape[1]
    # d(loss)/d(z_out) = (p - y) where the clip is inactive, 0 where it clamps
    active = (p > CLIP_EPS) & (p < 1.0 - CLIP_EPS)
    delta = np.where(active, p - y, 0.0) / n
    grads_w = [np.empty_like(w) for w in model.weights]
    grads_b = [np.empty_like(b) for b in model.biases]
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (pres[i - 1] > 0.0)
    return loss, grads_w, grads_b


def train(
    model: MlpModel,
    records: Sequence[PairRecord],
    epochs: int,
    lr: float = 1e-3,
    betas: tuple[float, float] = (0.9, 0.999),
    batch_size: int = 64,
    seed: int = 0,
) -> tuple[MlpModel, list[float]]:
    """Adam training on (pair encoding -> first stored plan) targets.

    Records without plans are skipped.  Returns a trained copy of the model
    and the per-epoch mean loss curve; the input model is left untouched.
    """
    usable = [r for r in records if r.plans]
    model = model.copy()
    if not usable or epochs <= 0:
        return model, []
    x = np.stack([encode_pair(r.src, r.tgt) for r in usable])
    y = np.stack([encode_sequence(r.plans[0]).astype(np.float64) for r in usable])
    rng = np.random.default_rng(seed)
    b1, b2 = betas
    eps = 1e-8
    m_w = [np.zeros_like(w) for w in model.weights]
    v_w = [np.zeros_like(w) for w in model.weights]
    m_b = [np.zeros_like(b) for b in model.biases]
    v_b = [np.zeros_like(b) for b in model.biases]
    step = 0
    curve: list[float] = []
    n = len(usable)
    for _ in range(epochs):
        order = rng.permutation(n)
        losses = []
        for lo in range(0, n, batch_size):
            idx = order[lo : lo + batch_size]
            loss, gw, gb = _gradients(model, x[idx], y[idx])
            losses.append(loss)
            step += 1
            c1 = 1.0 - b1**step
            c2 = 1.0 - b2**step
            for i in range(len(model.weights)):
                for g, m, v, param in (
                    (gw[i], m_w[i], v_w[i], model.weights[i]),
                    (gb[i], m_b[i], v_b[i], model.biases[i]),
                ):
                    m *= b1
                    m += (1.0 - b1) * g
                    v *= b2
                    v += (1.0 - b2) * g * g
                    param -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
        curve.append(float(np.mean(losses)))
    return model, curve


def predict(model: MlpModel, src: Configuration, tgt: Configuration) -> MoveSequence:
    return decode_sequence(forward(model, encode_pair(src, tgt)))


def grad_check(
    model: MlpModel,
    x,
    y,
    h: float = 1e-5,
    tol: float = 1e-4,
    kink_eps: float = 1e-6,
) -> tuple[float, list[tuple[int, str, int, float]]]:
    """Analytic vs central-difference gradients on one sample.

    Hidden units whose pre-activation sits within ``kink_eps`` of the ReLU
    kink are excluded.  Returns the max relative error and the list of
    (layer, 'w'|'b', flat index, error) entries exceeding ``tol``.
    """
    x = np.asarray(x, dtype=np.float64)[None, :]
    y = np.asarray(y, dtype=np.float64)[None, :]
    _, pres = _forward_full(model, x)
    safe_unit = [np.abs(z[0]) > kink_eps for z in pres[:-1]]

    _, gw, gb = _gradients(model, x, y)

    def numeric(param: np.ndarray, flat: int) -> float:
        orig = param.flat[flat]
        param.flat[flat] = orig + h
        up = bce_loss(forward(model, x[0]), y[0])
        param.flat[flat] = orig - h
        down = bce_loss(forward(model, x[0]), y[0])
        param.flat[flat] = orig
        return (up - down) / (2.0 * h)

    worst = 0.0
    violations: list[tuple[int, str, int, float]] = []
    for layer in range(len(model.weights)):
        for kind, param, grad in (("w", model.weights[layer], gw[layer]), ("b", model.biases[layer], gb[layer])):
            for flat in range(param.size):
                if layer < len(safe_unit):
                    unit = flat % param.shape[-1] if kind == "w" else flat
                    if not safe_unit[layer][unit]:
                        continue
                ga = float(grad.flat[flat])
                gn = numeric(param, flat)
                if abs(ga) < 1e-10 and abs(gn) < 1e-10:
                    continue
                err = abs(ga - gn) / max(abs(ga), abs(gn))
                worst = max(worst, err)
                if err > tol:
                    violations.append((layer, kind, flat, err))
    return worst, violations


def save_model(model: MlpModel, path) -> None:
    """Versioned binary checkpoint: magic, version, widths, then float64
    little-endian parameters in layer order (weights row-major, then bias)."""
    widths = model.widths
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(widths)))
        fh.write(struct.pack(f"<{len(widths)}I", *widths))
        for w, b in zip(model.weights, model.biases):
            fh.write(w.astype("<f8").tobytes())
            fh.write(b.astype("<f8").tobytes())


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a sequencer checkpoint")
        version, nw = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        widths = struct.unpack(f"<{nw}I", fh.read(4 * nw))
        weights, biases = [], []
        for fi, fo in zip(widths, widths[1:]):
            w = np.frombuffer(fh.read(8 * fi * fo), dtype="<f8").reshape(fi, fo).copy()
            b = np.frombuffer(fh.read(8 * fo), dtype="<f8").copy()
            weights.append(w)
            biases.append(b)
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes in checkpoint")
    return MlpModel(weights, biases)
