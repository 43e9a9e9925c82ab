"""Dense float64 tensors with reverse-mode differentiation.

Every operation on tensors that require gradients records its parents and a
closure mapping the output gradient to parent gradients. ``backward`` sorts
the recorded graph topologically and runs the closures in reverse.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeError(ValueError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "parents", "backward_fn", "op", "name")
    __array_ufunc__ = None  # make ndarray <op> Tensor defer to Tensor's reflected operators

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.parents: tuple[Tensor, ...] = ()
        self.backward_fn: Callable | None = None
        self.op = "leaf"
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, op={self.op})"

    def backward(self):
        backward(self)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return getitem(self, key)

    @property
    def T(self):
        return transpose(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents: Sequence[Tensor], backward_fn, op: str) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out.parents = tuple(parents)
        out.backward_fn = backward_fn
        out.op = op
    return out


class Tape:
    """Recorded nodes reachable from a root, parents before children."""

    def __init__(self, root: Tensor):
        self.root = root
        self.nodes = _topological(root)

    def __len__(self):
        return len(self.nodes)

    def backward(self, seed: np.ndarray | None = None):
        grads = {id(self.root): np.ones_like(self.root.data) if seed is None else seed}
        for node in reversed(self.nodes):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.backward_fn is None:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg


def _topological(root: Tensor) -> list[Tensor]:
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited or not node.requires_grad:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in reversed(node.parents):
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> Tape:
    """Accumulate d(loss)/d(leaf) into ``leaf.grad`` for every reachable leaf."""
    if loss.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    tape = Tape(loss)
    tape.backward()
    return tape


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def _check_broadcast(a: Tensor, b: Tensor, op: str):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")
    return _node(a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")
    return _node(a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)), "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def back(g):
        return (_unbroadcast(g * b.data, a.shape) if a.requires_grad else None,
                _unbroadcast(g * a.data, b.shape) if b.requires_grad else None)
    return _node(a.data * b.data, (a, b), back, "mul")


def matmul(a, b) -> Tensor:
    """``[..., m, k] @ [k, n]`` or ``[..., m, k] @ [..., k, n]``."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are not conformant")

    def back(g):
        ga = gb = None
        if a.requires_grad:
            ga = _unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape)
        if b.requires_grad:
            if a.ndim > 2 and b.ndim == 2:
                k, n = a.shape[-1], g.shape[-1]
                gb = a.data.reshape(-1, k).T @ g.reshape(-1, n)
            else:
                gb = _unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape)
        return ga, gb
    return _node(a.data @ b.data, (a, b), back, "matmul")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        shapes = ", ".join(str(t.shape) for t in tensors)
        raise ShapeError(f"concat: incompatible shapes {shapes} on axis {axis}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def back(g):
        return tuple(np.split(g, bounds, axis=axis))
    return _node(data, tensors, back, "concat")


def concat_rows(a, b) -> Tensor:
    """Stack a ``[p]`` and a ``[q]`` vector into one ``[p+q]`` vector."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 1 or b.ndim != 1:
        raise ShapeError(f"concat_rows: expected vectors, got {a.shape} and {b.shape}")
    return concat([a, b], axis=0)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ShapeError(f"stack: shapes differ: {sorted(shapes)}")
    data = np.stack([t.data for t in tensors], axis=axis)

    def back(g):
        return tuple(np.moveaxis(g, axis, 0))
    return _node(data, tensors, back, "stack")


def reshape(x: Tensor, shape) -> Tensor:
    x = as_tensor(x)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot reshape {x.shape} to {shape}") from None
    return _node(data, (x,), lambda g: (g.reshape(x.shape),), "reshape")


def transpose(x: Tensor, axes=None) -> Tensor:
    x = as_tensor(x)
    data = np.transpose(x.data, axes)
    inv = None if axes is None else np.argsort(axes)
    return _node(data, (x,), lambda g: (np.transpose(g, inv),), "transpose")


def getitem(x: Tensor, key) -> Tensor:
    x = as_tensor(x)

    def back(g):
        out = np.zeros_like(x.data)
        if _is_fancy(key):
            np.add.at(out, key, g)
        else:
            out[key] = g
        return (out,)
    return _node(x.data[key], (x,), back, "getitem")


def _is_fancy(key) -> bool:
    keys = key if isinstance(key, tuple) else (key,)
    return any(isinstance(k, (list, np.ndarray)) for k in keys)


def take_rows(table: Tensor, idx) -> Tensor:
    """Gather rows of a ``[n, d]`` table; result has shape ``idx.shape + (d,)``."""
    table = as_tensor(table)
    idx = np.asarray(idx, dtype=np.intp)
    if table.ndim != 2:
        raise ShapeError(f"take_rows: table must be 2-D, got {table.shape}")

    def back(g):
        out = np.zeros_like(table.data)
        np.add.at(out, idx.ravel(), g.reshape(-1, table.shape[1]))
        return (out,)
    return _node(table.data[idx], (table,), back, "take_rows")


def sum(x: Tensor, axis=None) -> Tensor:  # noqa: A001
    x = as_tensor(x)

    def back(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)
    return _node(x.data.sum(axis=axis), (x,), back, "sum")


def mean(x: Tensor, axis=None) -> Tensor:
    x = as_tensor(x)
    n = x.size if axis is None else x.shape[axis]
    return mul(sum(x, axis), 1.0 / n)


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    # split by sign so exp never overflows
    z = np.exp(-np.abs(x.data))
    s = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return _node(s, (x,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def tanh(x: Tensor) -> Tensor:
    x = as_tensor(x)
    t = np.tanh(x.data)
    return _node(t, (x,), lambda g: (g * (1.0 - t * t),), "tanh")


def relu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    pos = x.data > 0
    return _node(np.where(pos, x.data, 0.0), (x,), lambda g: (g * pos,), "relu")


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis."""
    x = as_tensor(x)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ShapeError(f"softmax: needs at least one class, got shape {x.shape}")
    s = _softmax(x.data)

    def back(g):
        return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)
    return _node(s, (x,), back, "softmax")


PROB_FLOOR = 1e-12


def _gold_array(gold, shape) -> np.ndarray:
    gold = np.asarray(gold, dtype=np.intp)
    k = shape[-1]
    if gold.shape != shape[:-1]:
        raise ShapeError(f"cross_entropy: gold shape {gold.shape} does not match {shape}")
    if np.any((gold < 0) | (gold >= k)):
        raise IndexError(f"gold class index out of range for {k} classes")
    return gold


def cross_entropy(probs: Tensor, gold) -> Tensor:
    """Mean of ``-ln(max(probs[gold], 1e-12))`` over leading axes."""
    probs = as_tensor(probs)
    gold = _gold_array(gold, probs.shape)
    flat = probs.data.reshape(-1, probs.shape[-1])
    rows = np.arange(flat.shape[0])
    picked = flat[rows, gold.ravel()]
    n = flat.shape[0]
    loss = -np.log(np.maximum(picked, PROB_FLOOR)).sum() / n

    def back(g):
        out = np.zeros_like(flat)
        out[rows, gold.ravel()] = np.where(picked > PROB_FLOOR, -1.0 / np.maximum(picked, PROB_FLOOR), 0.0)
        return ((g / n) * out.reshape(probs.shape),)
    return _node(loss, (probs,), back, "cross_entropy")


def softmax_cross_entropy(logits: Tensor, gold, weights=None) -> Tensor:
    """``cross_entropy(softmax(logits), gold)`` with the gradient taken in one piece.

    ``weights`` (one per example) turns the mean into a weighted mean.
    """
    logits = as_tensor(logits)
    gold = _gold_array(gold, logits.shape)
    p = _softmax(logits.data).reshape(-1, logits.shape[-1])
    rows = np.arange(p.shape[0])
    if weights is None:
        w = np.full(p.shape[0], 1.0 / p.shape[0])
    else:
        w = np.asarray(weights, dtype=np.float64).ravel()
        w = w / w.sum()
    loss = -(w * np.log(np.maximum(p[rows, gold.ravel()], PROB_FLOOR))).sum()

    def back(g):
        d = p.copy()
        d[rows, gold.ravel()] -= 1.0
        return ((g * w[:, None] * d).reshape(logits.shape),)
    return _node(loss, (logits,), back, "softmax_cross_entropy")


def same_padding(width: int) -> tuple[int, int]:
    left = (width - 1) // 2
    return left, width - 1 - left


def conv1d(x: Tensor, filters: Tensor) -> Tensor:
    """Same-length 1-D convolution (cross-correlation) with zero padding.

    ``x`` is ``[c_in, T]`` or ``[B, c_in, T]``; ``filters`` is ``[c_out, c_in, w]``.
    Output position ``t`` sees inputs ``t - left .. t + right``.
    """
    x, filters = as_tensor(x), as_tensor(filters)
    if filters.ndim != 3 or x.ndim not in (2, 3) or x.shape[-2] != filters.shape[1]:
        raise ShapeError(f"conv1d: input {x.shape} and filters {filters.shape} do not match")
    c_out, c_in, w = filters.shape
    T = x.shape[-1]
    if T < 1 or w < 1:
        raise ShapeError(f"conv1d: empty input {x.shape} or filters {filters.shape}")
    batched = x.ndim == 3
    xb = x.data if batched else x.data[None]
    left, right = same_padding(w)
    xp = np.pad(xb, ((0, 0), (0, 0), (left, right)))
    # cols[b, t, c*w + k] = xp[b, c, t + k]
    cols = sliding_window_view(xp, w, axis=2).transpose(0, 2, 1, 3).reshape(xb.shape[0], T, c_in * w)
    wmat = filters.data.reshape(c_out, c_in * w)
    out = (cols @ wmat.T).transpose(0, 2, 1)

    def back(g):
        gb = g if batched else g[None]
        gt = gb.transpose(0, 2, 1)  # [B, T, c_out]
        gw = None
        if filters.requires_grad:
            gw = (gt.reshape(-1, c_out).T @ cols.reshape(-1, c_in * w)).reshape(filters.shape)
        gx = None
        if x.requires_grad:
            gcols = (gt @ wmat).reshape(xb.shape[0], T, c_in, w)
            gxp = np.zeros_like(xp)
            for k in range(w):
                gxp[:, :, k:k + T] += gcols[:, :, :, k].transpose(0, 2, 1)
            gx = gxp[:, :, left:left + T]
            if not batched:
                gx = gx[0]
        return gx, gw
    return _node(out if batched else out[0], (x, filters), back, "conv1d")


def maxpool_time(x: Tensor, lengths=None) -> Tensor:
    """Per-channel maximum over the last (time) axis.

    ``lengths`` (shape ``x.shape[:-2]``) limits each row to its first
    ``lengths[i]`` steps. Gradient goes to the first maximal position.
    """
    x = as_tensor(x)
    if x.ndim < 2 or x.shape[-1] < 1:
        raise ShapeError(f"maxpool_time: expected [..., c, T] with T >= 1, got {x.shape}")
    data = x.data
    if lengths is not None:
        lengths = np.asarray(lengths)
        valid = np.arange(x.shape[-1]) < lengths[..., None, None]
        data = np.where(valid, data, -np.inf)
    arg = np.argmax(data, axis=-1)
    out = np.take_along_axis(x.data, arg[..., None], axis=-1)[..., 0]

    def back(g):
        gx = np.zeros_like(x.data)
        np.put_along_axis(gx, arg[..., None], g[..., None], axis=-1)
        return (gx,)
    return _node(out, (x,), back, "maxpool_time")
