"""Random finite-difference cases shared by the autodiff, neural and acceptance tests.

Each builder takes a generator and returns ``(loss_fn, inputs)``; the loss is a
random projection of the op's output so every output entry matters.
"""
import numpy as np

from sentimix import autodiff as ad
from sentimix.autodiff import Tensor, check_gradients
from sentimix.corpus import LangTag, SentimentLabel, Token, Tweet

TOL = 1e-4


def leaf(rng, *shape, low=-1.0, high=1.0):
    return Tensor(rng.uniform(low, high, shape), requires_grad=True)


def away_from_zero(rng, *shape):
    # relu and maxpool have kinks; keep samples clear of them
    x = rng.uniform(0.1, 1.0, shape) * rng.choice([-1.0, 1.0], shape)
    return Tensor(x, requires_grad=True)


def distinct(rng, *shape):
    # maxpool ties would make the numeric gradient ill-defined
    x = rng.permutation(np.prod(shape)).reshape(shape) * 0.1 + rng.uniform(0, 0.01, shape)
    return Tensor(x, requires_grad=True)


def projected(fn, out_shape, rng):
    r = rng.normal(size=out_shape)
    return lambda: ad.sum(fn() * r)


def _binary(op):
    def build(rng):
        shape = tuple(rng.integers(1, 4, size=2))
        a, b = leaf(rng, *shape), leaf(rng, *shape)
        return projected(lambda: op(a, b), shape, rng), [a, b]
    return build


def _unary(op, sample=leaf):
    def build(rng):
        shape = tuple(rng.integers(1, 5, size=2))
        x = sample(rng, *shape)
        return projected(lambda: op(x), shape, rng), [x]
    return build


def case_matmul(rng):
    m, k, n = rng.integers(1, 5, size=3)
    a, b = leaf(rng, m, k), leaf(rng, k, n)
    return projected(lambda: ad.matmul(a, b), (m, n), rng), [a, b]


def case_batched_matmul(rng):
    B, m, k, n = rng.integers(1, 4, size=4)
    a, b = leaf(rng, B, m, k), leaf(rng, k, n)
    return projected(lambda: a @ b, (B, m, n), rng), [a, b]


def case_broadcast_add(rng):
    m, n = rng.integers(1, 5, size=2)
    a, b = leaf(rng, m, n), leaf(rng, n)
    return projected(lambda: a + b, (m, n), rng), [a, b]


def case_concat_rows(rng):
    p, q = rng.integers(1, 6, size=2)
    a, b = leaf(rng, p), leaf(rng, q)
    return projected(lambda: ad.concat_rows(a, b), (p + q,), rng), [a, b]


def case_concat(rng):
    m, p, q = rng.integers(1, 4, size=3)
    a, b = leaf(rng, m, p), leaf(rng, m, q)
    return projected(lambda: ad.concat([a, b], axis=1), (m, p + q), rng), [a, b]


def case_stack(rng):
    shape = tuple(rng.integers(1, 4, size=2))
    a, b, c = (leaf(rng, *shape) for _ in range(3))
    return projected(lambda: ad.stack([a, b, c], axis=1), (shape[0], 3, shape[1]), rng), [a, b, c]


def case_reshape_transpose(rng):
    m, n = rng.integers(1, 5, size=2)
    x = leaf(rng, m, n)
    return projected(lambda: ad.transpose(ad.reshape(x, (n, m))), (m, n), rng), [x]


def case_getitem(rng):
    m, n = rng.integers(2, 5, size=2)
    x = leaf(rng, m, n)
    idx = rng.integers(m, size=4)  # repeats exercise the scatter-add
    return projected(lambda: x[idx, 1:], (4, n - 1), rng), [x]


def case_take_rows(rng):
    n, d = rng.integers(2, 5, size=2)
    table = leaf(rng, n, d)
    idx = rng.integers(n, size=(2, 3))
    return projected(lambda: ad.take_rows(table, idx), (2, 3, d), rng), [table]


def case_sum_axis(rng):
    m, n = rng.integers(1, 5, size=2)
    x = leaf(rng, m, n)
    return projected(lambda: ad.sum(x, axis=0), (n,), rng), [x]


def case_mean(rng):
    m, n = rng.integers(1, 5, size=2)
    x = leaf(rng, m, n)
    return projected(lambda: ad.mean(x, axis=1), (m,), rng), [x]


def case_softmax(rng):
    m, k = rng.integers(1, 5, size=2)
    x = leaf(rng, m, k, low=-3, high=3)
    return projected(lambda: ad.softmax(x), (m, k), rng), [x]


def case_cross_entropy(rng):
    k = int(rng.integers(2, 6))
    x = leaf(rng, k, low=-2, high=2)
    gold = int(rng.integers(k))
    return (lambda: ad.cross_entropy(ad.softmax(x), gold)), [x]


def case_softmax_cross_entropy(rng):
    n, k = rng.integers(1, 5), rng.integers(2, 5)
    x = leaf(rng, n, k, low=-3, high=3)
    gold = rng.integers(k, size=n)
    w = rng.uniform(0.5, 2.0, size=n)
    return (lambda: ad.softmax_cross_entropy(x, gold, w)), [x]


def case_conv1d(rng):
    c_in, c_out, w, T = rng.integers(1, 4), rng.integers(1, 4), rng.integers(1, 5), rng.integers(1, 7)
    x, f = leaf(rng, c_in, T), leaf(rng, c_out, c_in, w)
    return projected(lambda: ad.conv1d(x, f), (c_out, T), rng), [x, f]


def case_batched_conv1d(rng):
    B, c_in, c_out, w, T = 2, rng.integers(1, 3), rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 6)
    x, f = leaf(rng, B, c_in, T), leaf(rng, c_out, c_in, w)
    return projected(lambda: ad.conv1d(x, f), (B, c_out, T), rng), [x, f]


def case_maxpool(rng):
    c, T = rng.integers(1, 5), rng.integers(1, 6)
    x = distinct(rng, c, T)
    return projected(lambda: ad.maxpool_time(x), (c,), rng), [x]


def case_maxpool_lengths(rng):
    B, c, T = 3, rng.integers(1, 4), rng.integers(1, 6)
    x = distinct(rng, B, c, T)
    lengths = rng.integers(1, T + 1, size=B)
    return projected(lambda: ad.maxpool_time(x, lengths), (B, c), rng), [x]


PRIMITIVES = {
    "add": _binary(ad.add),
    "sub": _binary(ad.sub),
    "mul": _binary(ad.mul),
    "broadcast_add": case_broadcast_add,
    "matmul": case_matmul,
    "batched_matmul": case_batched_matmul,
    "concat_rows": case_concat_rows,
    "concat": case_concat,
    "stack": case_stack,
    "reshape_transpose": case_reshape_transpose,
    "getitem": case_getitem,
    "take_rows": case_take_rows,
    "sum": case_sum_axis,
    "mean": case_mean,
    "sigmoid": _unary(ad.sigmoid, lambda rng, *s: leaf(rng, *s, low=-4, high=4)),
    "tanh": _unary(ad.tanh),
    "relu": _unary(ad.relu, away_from_zero),
    "softmax": case_softmax,
    "cross_entropy": case_cross_entropy,
    "softmax_cross_entropy": case_softmax_cross_entropy,
    "conv1d": case_conv1d,
    "batched_conv1d": case_batched_conv1d,
    "maxpool_time": case_maxpool,
    "maxpool_time_lengths": case_maxpool_lengths,
}


def primitive_errors(name, n=20, seed=0):
    rng = np.random.default_rng([seed, sum(map(ord, name))])
    return [check_gradients(*PRIMITIVES[name](rng)) for _ in range(n)]


# whole model

WORDS = ("acha", "good", "bura", "bad", "x", "zq", "गुड")


def model_case(branches, n_layers, rng):
    """A tiny model and a padded batch of three tweets; returns ``(loss_fn, params)``."""
    from conftest import small_model
    model = small_model(branches, n_layers, seed=int(rng.integers(2 ** 31)), dim=3, emb_dim=4, hidden=2)
    for p in model.parameters():
        # move every parameter off its initial value so zero biases are also tested
        p.data += rng.normal(0, 0.3, p.shape)
    tweets = []
    for i, T in enumerate((3, 1, 2)):
        words = [WORDS[j] for j in rng.integers(len(WORDS), size=T)]
        tweets.append(Tweet(str(i), tuple(Token(w, LangTag.OTHER) for w in words), SentimentLabel.POSITIVE))
    batch = model.encode(tweets, rng.integers(3, size=3))
    return (lambda: model.loss(batch)), model.parameters()


BRANCH_CONFIGS = {"char": ("char",), "word": ("word",), "dual": ("char", "word")}


def model_errors(config, n=20, seed=0, n_layers=1):
    rng = np.random.default_rng([seed, len(config), n_layers])
    return [check_gradients(*model_case(BRANCH_CONFIGS[config], n_layers, rng)) for _ in range(n)]
