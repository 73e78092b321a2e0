"""Character-level encoder-decoder with bilinear attention.

Shared by the MWT expander and the lemmatizer: encode the source symbols
with a BiLSTM, decode greedily (no beam) with single-head dot-product
attention over encoder states.  The encoder summary (final states of both
directions) doubles as the hook for shortcut classifiers.
"""

from __future__ import annotations

import numpy as np

from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import BiLSTM, Embedding, Linear, LSTM, ParamSet, attention
from .nn.vocab import BOS, EOS, Vocab


class Seq2Seq:
    def __init__(self, params: ParamSet, rng, name: str, vocab: Vocab,
                 char_dim: int, hidden: int):
        self.vocab = vocab
        self.hidden = hidden
        enc_out = 2 * hidden
        self.embed = Embedding(params, rng, f"{name}.embed", len(vocab), char_dim)
        self.encoder = BiLSTM(params, rng, f"{name}.encoder", char_dim, hidden)
        self.init_proj = Linear(params, rng, f"{name}.init", enc_out, enc_out)
        self.decoder = LSTM(params, rng, f"{name}.decoder", char_dim + enc_out, enc_out)
        self.att_W = params.new(f"{name}.att.W",
                                rng.normal(0, 1.0 / np.sqrt(enc_out), (enc_out, enc_out)))
        self.out = Linear(params, rng, f"{name}.out", 2 * enc_out, len(vocab))

    def encode(self, src_symbols: list[str]):
        """Returns (per-position states (n, 2h), summary (1, 2h))."""
        if not src_symbols:
            raise ValueError("empty source sequence")
        states = self.encoder(self.embed(self.vocab.encode_all(src_symbols)))
        n = states.data.shape[0]
        fwd_last = ad.narrow(ad.narrow(states, 0, n - 1, 1), 1, 0, self.hidden)
        bwd_first = ad.narrow(ad.narrow(states, 0, 0, 1), 1, self.hidden, self.hidden)
        summary = ad.concat([fwd_last, bwd_first], axis=1)
        return states, summary

    def _step(self, prev_id: int, state, enc_states):
        context, _ = attention(state[0], enc_states, enc_states, self.att_W)
        emb = self.embed([prev_id])
        h, c = self.decoder.step(ad.concat([emb, context], axis=1), state)
        logits = self.out(ad.concat([h, context], axis=1))
        return logits, (h, c)

    def _initial_state(self, summary):
        h0 = ad.tanh(self.init_proj(summary))
        return h0, Tensor(np.zeros((1, 2 * self.hidden)))

    def loss(self, enc_states, summary, tgt_symbols: list[str]) -> Tensor:
        """Teacher-forced cross-entropy over the target plus the end symbol."""
        targets = self.vocab.encode_all(tgt_symbols) + [self.vocab.encode(EOS)]
        state = self._initial_state(summary)
        prev = self.vocab.encode(BOS)
        losses = []
        for gold in targets:
            logits, state = self._step(prev, state, enc_states)
            losses.append(ad.cross_entropy(ad.reshape(logits, (len(self.vocab),)), gold))
            prev = gold
        total = losses[0]
        for piece in losses[1:]:
            total = ad.add(total, piece)
        return total

    def greedy(self, enc_states, summary, max_len: int) -> tuple[list[str], bool]:
        """Greedy decode; returns (symbols, terminated) where ``terminated``
        is False when the length cap fired before the end symbol."""
        state = self._initial_state(summary)
        prev = self.vocab.encode(BOS)
        eos = self.vocab.encode(EOS)
        out: list[str] = []
        for _ in range(max_len):
            logits, state = self._step(prev, state, enc_states)
            prev = int(np.argmax(logits.data))  # ties resolve to the lowest index
            if prev == eos:
                return out, True
            out.append(self.vocab.decode(prev))
        return out, False
