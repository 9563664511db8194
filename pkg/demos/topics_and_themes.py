"""
Topics from mean word vectors
=============================

Documents are embedded as normalised mean word vectors, reduced with PCA,
clustered by density, and described by class-based TF-IDF terms. Topics
are then grouped into analyst-defined themes.
"""

import tempfile

from discourse import synthetic
from discourse.config import load_config
from discourse.corpus import load_corpus
from discourse.relevance import ExclusionRule, filter_corpus
from discourse.seedex import load_embeddings
from discourse.topics import OUTLIER, TopicModelConfig, embed_docs, fit_topics, load_theme_map, topic_terms

paths = synthetic.write_fixture(tempfile.mkdtemp())
cfg = load_config(paths.config)  # window, language and exclusion terms
records, _ = load_corpus(paths.corpus, (cfg.begin, cfg.end), cfg.lang)
relevant, _ = filter_corpus(records, [synthetic.QUERY, *synthetic.SEED_WORDS], ExclusionRule(frozenset(cfg.exclusion_terms)))

docs, _ = embed_docs(relevant, embeddings=load_embeddings(paths.embeddings))
tcfg = TopicModelConfig(min_cluster_size=20)
assignment = fit_topics(docs, tcfg)
print("outliers:", sum(v == OUTLIER for v in assignment.values()))

stop = paths.stopwords.read_text().split()
for t in topic_terms(assignment, relevant, tcfg, stop):
    print(f"topic {t.id:2d} size={t.size:4d}", ", ".join(term for term, _ in t.top_terms[:5]))

###############################################################################
# Themes map topic ids to named groups.

tm = load_theme_map(paths.theme_map)
for name, ids in tm.themes.items():
    print(f"{name}: topics {ids}")
