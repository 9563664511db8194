"""
Daily sentiment from a dual-polarity lexicon
=============================================

Each document gets a positive strength (1..5) and a negative strength
(-1..-5). Days are summarised as SUM, REL = SUM / COUNT, and the number of
positive and negative documents.
"""

import tempfile
from pathlib import Path

from discourse import synthetic
from discourse.config import load_config
from discourse.corpus import load_corpus
from discourse.relevance import ExclusionRule, filter_corpus
from discourse.sentiment import Metric, aggregate, label, load_lexicon, score_text
from discourse.svg import plot_svg

work = Path(tempfile.mkdtemp())
paths = synthetic.write_fixture(work)
cfg = load_config(paths.config)  # window, language and exclusion terms
records, _ = load_corpus(paths.corpus, (cfg.begin, cfg.end), cfg.lang)
relevant, stats = filter_corpus(records, [synthetic.QUERY, *synthetic.SEED_WORDS], ExclusionRule(frozenset(cfg.exclusion_terms)))
print(f"relevant: {stats.relevant} of {stats.total}")

lex = load_lexicon(paths.lexicon)
for text in ("impfung super", "impfung nicht super", "impfung schrecklich"):
    s = score_text(text, lex)
    print(f"{text!r:26} pos={s.pos} neg={s.neg} rel={s.rel} label={label(s).value}")

###############################################################################
# Values are kept as exact fractions, so REL * COUNT == SUM holds exactly.

pairs = [(r, score_text(r.text, lex)) for r in relevant]
window = (synthetic.BEGIN, synthetic.END)
rel = aggregate(pairs, Metric.REL, window)
count = aggregate(pairs, Metric.COUNT, window)
sum_ = aggregate(pairs, Metric.SUM, window)
assert all(r * c == s for r, c, s in zip(rel.exact, count.exact, sum_.exact))
print("empty days:", len(rel.empty_days))

###############################################################################
# REL steps down in mid-April, when the fixture's mood turns.

out = plot_svg([rel], work / "rel.svg", title="REL")
print("wrote", out)
