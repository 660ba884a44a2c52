"""Topic representation walkthrough: class counts, c-TF-IDF, keyword search.

Three hand-labeled document groups become three topics with ranked term
lists; the same weight vectors then answer a keyword search by cosine
similarity.
"""

import numpy as np

from topicflux import build_class_counts, class_tfidf, search_topics, tokenize, top_terms

DOCS = [
    # topic 0: ventilation
    "Ventilator allocation and airway pressure management during the surge",
    "Prone positioning improved oxygenation for patients on ventilators",
    "Airway pressure release ventilation versus conventional ventilator modes",
    # topic 1: vaccination
    "Vaccine efficacy against the delta variant after two doses",
    "Immunization campaigns and vaccine hesitancy in rural areas",
    "Booster doses restored antibody titers after vaccination",
    # topic 2: remote work
    "Work-from-home policies and productivity during lockdowns",
    "Remote work reshaped commuting patterns and office demand",
]
LABELS = np.array([0, 0, 0, 1, 1, 1, 2, 2])

# Tokenization keeps hyphenated domain terms whole and drops stopwords.
print("tokens:", tokenize("Work-from-home policies and SARS-CoV-2 testing"))

vocab, counts = build_class_counts(DOCS, LABELS)
print(f"\nvocabulary: {len(vocab)} terms, e.g. {vocab.terms[:6]}")

model = class_tfidf(vocab, counts, class_sizes=np.bincount(LABELS), reduce_frequent_words=True)

for topic in range(3):
    terms = ", ".join(f"{t} ({w:.2f})" for t, w in top_terms(model, topic, n=5))
    print(f"topic {topic}: {terms}")

# Search ranks topics by cosine between the query's term counts and each
# topic's weight vector.
for query in ("ventilator pressure", "vaccine booster", "commuting"):
    result = search_topics(model, query, n=3)
    ranking = [(card.topic_id, round(card.similarity, 3)) for card in result.cards]
    print(f"\nquery {query!r} -> {ranking}")

# Out-of-vocabulary queries are distinguishable from unsearchable ones.
print("\nOOV query status:", search_topics(model, "spectroscopy").status)
