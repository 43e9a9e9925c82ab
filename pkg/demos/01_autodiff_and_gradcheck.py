"""The autodiff engine on its own: build a graph, run it backwards, check it.

Run with ``python demos/01_autodiff_and_gradcheck.py``.
"""
import numpy as np

from sentimix import autodiff as ad
from sentimix.autodiff import Parameter, Tensor
from sentimix.corpus import LangTag, SentimentLabel, Token, Tweet
from sentimix.features import EmbeddingTable
from sentimix.neural import CharCnnConfig, CharVocab, ModelSpec, SsLstmModel

# %% A scalar: d(x^2)/dx at x=3 is 6, and one SGD step of 0.1 lands on 2.4.
x = Parameter(np.array(3.0), "x")
(x * x).backward()
print("grad of x^2 at 3:", x.grad)
ad.sgd_step([x], 0.1)
print("after one sgd step:", x.data)

# %% A small convolution followed by max-over-time pooling.
rng = np.random.default_rng(0)
chars = Tensor(rng.normal(size=(4, 7)), requires_grad=True)   # 4 channels, 7 characters
filters = Tensor(rng.normal(size=(3, 4, 2)), requires_grad=True)  # 3 filters of width 2
pooled = ad.maxpool_time(ad.relu(ad.conv1d(chars, filters)))
ad.sum(pooled).backward()
print("pooled features:", np.round(pooled.data, 3))
print("gradient reaches", int((chars.grad != 0).sum()), "of", chars.grad.size, "input cells")

# %% Central differences agree with the tape.
err = ad.check_gradients(lambda: ad.sum(ad.maxpool_time(ad.relu(ad.conv1d(chars, filters)))),
                         [chars, filters])
print(f"conv1d + relu + maxpool relative error: {err:.2e}")

# %% The whole dual-branch model, shrunk so the numeric pass is quick.
table = EmbeddingTable(4, {w: rng.normal(size=4) for w in ("acha", "bura", "match")})
spec = ModelSpec(embed_dim=3, hidden=2, fc_hidden=3, char=CharCnnConfig(char_emb_dim=3, filter_widths=(1, 2, 3)))
model = SsLstmModel(spec, CharVocab(sorted(set("achburmt"))), table, seed=1)
tweets = [Tweet("a", (Token("match", LangTag.ENG), Token("acha", LangTag.HIN)), SentimentLabel.POSITIVE),
          Tweet("b", (Token("bura", LangTag.HIN),), SentimentLabel.NEGATIVE)]
batch = model.encode(tweets, [tw.label.index for tw in tweets])
err = ad.check_gradients(lambda: model.loss(batch), model.parameters())
print(f"SS-LSTM ({len(model.params)} parameter tensors) relative error: {err:.2e}")
