"""Regenerates nsfnet.json and nsfnet_routes.json.

Spans are the widely used 14-node NSFNet distance set (km). Each
undirected span becomes two directed links. Candidate routes are the
three shortest loopless paths by length for every ordered pair.
"""
import itertools
import json

import networkx as nx

SPANS = [
    (0, 1, 1100), (0, 2, 1600), (0, 7, 2800), (1, 2, 600), (1, 3, 1000),
    (2, 5, 2000), (3, 4, 600), (3, 10, 2400), (4, 5, 1100), (4, 6, 800),
    (5, 9, 1200), (5, 13, 2000), (6, 7, 700), (7, 8, 700), (8, 9, 900),
    (8, 11, 500), (8, 12, 500), (10, 11, 800), (10, 12, 800), (11, 13, 300),
    (12, 13, 300),
]
NODES = 14
SLOTS = 320
K = 3

links = []
for a, b, km in SPANS:
    links.append({"id": len(links), "src": a, "dst": b, "length": km, "slots": SLOTS})
    links.append({"id": len(links), "src": b, "dst": a, "length": km, "slots": SLOTS})

with open("nsfnet.json", "w") as f:
    json.dump({"name": "NSFNet", "nodes": [{"id": i} for i in range(NODES)], "links": links}, f, indent=2)
    f.write("\n")

g = nx.DiGraph()
g.add_nodes_from(range(NODES))
for l in links:
    g.add_edge(l["src"], l["dst"], length=l["length"])

routes = []
for s, d in itertools.permutations(range(NODES), 2):
    paths = list(itertools.islice(nx.shortest_simple_paths(g, s, d, weight="length"), K))
    routes.append({"src": s, "dst": d, "paths": paths})

with open("nsfnet_routes.json", "w") as f:
    json.dump({"name": "NSFNet-3SP", "routes": routes}, f)
    f.write("\n")
