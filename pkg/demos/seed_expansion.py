"""
Expanding one query keyword into a seed list
============================================

A single keyword misses most of the conversation around it. Here we take
"impfung", collect every lemma that shares a document with it, and keep
the ones whose word vectors point the same way.
"""

import tempfile

from discourse import synthetic
from discourse.config import load_config
from discourse.corpus import load_corpus, load_lemma_table
from discourse.seedex import ExpansionConfig, build_seed_list, load_embeddings

work = tempfile.mkdtemp()
paths = synthetic.write_fixture(work, seed=0)

cfg = load_config(paths.config)  # window, language and exclusion terms
records, stats = load_corpus(paths.corpus, (cfg.begin, cfg.end), cfg.lang)
print(f"{stats.kept} records kept of {stats.read} read")

###############################################################################
# Candidates are counted per document, then filtered by cosine similarity
# to the query (>= 0.6 by default) and cut to the top 30.

emb = load_embeddings(paths.embeddings)
lemmas = load_lemma_table(paths.lemma_table)
seeds = build_seed_list(records, synthetic.QUERY, lemmas, emb)
for t in seeds.terms:
    print(f"{t.lemma:14s} shared={t.cooccurrence:4d} cos={t.similarity:.3f}")

###############################################################################
# A stricter threshold only ever removes terms.

strict = build_seed_list(records, synthetic.QUERY, lemmas, emb, ExpansionConfig(min_similarity=0.9))
print("strict:", [t.lemma for t in strict.terms])
print("diagnostics:", seeds.diagnostics)
