"""Reading the estimated topic-transition matrix as an interaction graph.

Builds a transition matrix with planted structure, then surfaces it three
ways: the most asymmetric (directional) topic pairs, hub/authority roles
from HITS, and topic drift targets from personalized PageRank with and
without a "generic" topic excluded.
"""

import numpy as np

from hmhp import (
    TopicGraph,
    asymmetric_pairs,
    gini_coefficient,
    hits_scores,
    personalized_pagerank,
    top_words_per_topic,
)

K = 6
# Topic 5 acts as a sink every other topic drifts into; 0 -> 1 -> 2 chain on top.
trans = np.full((K, K), 0.04)
for k in range(K):
    trans[k, 5] += 0.55
trans[0, 1] += 0.25
trans[1, 2] += 0.25
trans[5, 5] += 0.2
trans /= trans.sum(axis=1, keepdims=True)

print("most directional topic pairs (score = forward minus backward mass):")
for k, kk, score in asymmetric_pairs(trans, top_n=4):
    print(f"  {k} -> {kk}: {score:.3f}")

graph = TopicGraph.from_transition(trans, threshold=0.1)
hub, auth = hits_scores(graph)
print("\nhub scores      :", np.round(hub, 3))
print("authority scores:", np.round(auth, 3))
print(f"gini: hubs {gini_coefficient(hub):.2f}, authorities "
      f"{gini_coefficient(auth):.2f} (authorities more skewed: cascades "
      f"funnel into topic 5)")

print("\ndrift targets from topic 0 (personalized PageRank, restart 0.15):")
for topic, score in personalized_pagerank(trans, start=0, top_n=3):
    print(f"  topic {topic}: {score:.3f}")
print("after excluding the generic sink topic 5:")
for topic, score in personalized_pagerank(trans, start=0, excluded={5}, top_n=3):
    print(f"  topic {topic}: {score:.3f}")

rng = np.random.default_rng(1)
zeta = rng.dirichlet(np.full(40, 0.2), size=K)
vocab = {i: f"tag{i}" for i in range(40)}
print("\ntop words per topic:")
for k, words in enumerate(top_words_per_topic(zeta, 5, vocab)):
    print(f"  topic {k}: {' '.join(words)}")
