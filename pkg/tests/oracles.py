"""Independent re-implementations used as test oracles.

Written loop-by-loop from the decoding rules, sharing no code with the
package beyond the language model being scored.
"""

import math

import numpy as np


def replay_generation(lm, context, b, lam, alpha, min_len, max_len, grammar, seed):
    """Penalized greedy decoding, one token and one penalty at a time.

    Returns (tokens, trace) where trace[i] is the augmented score list used at
    step i, before length control.
    """
    vocab = lm.vocabulary_
    tokens = vocab.tokens
    eos = len(tokens) - 1
    rng = np.random.default_rng(seed)
    review_mask = rng.random(eos) < b
    emitted = set()
    out, trace = [], []
    step = 0
    while True:
        start_mask = rng.random(eos) < b
        base = lm.next_token_logprobs(context, out)
        scores = []
        for j in range(len(tokens)):
            s = float(base[j])
            if j != eos:
                scale = 0.5 if tokens[j] in grammar else 1.0
                if review_mask[j]:
                    s += lam * scale
                if start_mask[j]:
                    s += lam * alpha ** step * scale
                if j in emitted:
                    s += lam * scale
            scores.append(s)
        trace.append(list(scores))
        scores[0] = -math.inf  # UNK is never emitted
        if step < min_len:
            scores[eos] = -math.inf
        if step >= max_len:
            scores = [-math.inf] * eos + [scores[eos]]
        best = max(range(len(scores)), key=lambda j: (scores[j], -j))
        if best == eos:
            return out, trace
        out.append(tokens[best])
        emitted.add(best)
        step += 1
