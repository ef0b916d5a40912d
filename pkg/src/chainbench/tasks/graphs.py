"""Graph tasks: Eulerian/Hamiltonian walks, isomorphism, max flow, shortest
distance and topological sorting."""
from __future__ import annotations

import heapq
from collections import Counter, deque
from fractions import Fraction

from .. import grammar as G
from ..render.svg import MARGIN, Canvas, circle_layout, draw_graph
from .common import TaskBase, register_task, require, step

YES_SHARE = 0.7


def graph_levels(**extra) -> dict:
    return {k: {"vertices": 4 + 2 * k, **{n: f(k) for n, f in extra.items()}} for k in range(1, 6)}


def norm_edges(edges) -> list[list[int]]:
    return sorted([min(u, v), max(u, v)] for u, v in edges)


def adjacency(n: int, edges) -> list[list[int]]:
    adj = [[] for _ in range(n)]
    for e in edges:
        u, v = e[0], e[1]
        adj[u].append(v)
        adj[v].append(u)
    for a in adj:
        a.sort()
    return adj


def is_connected(n: int, edges) -> bool:
    if n == 0:
        return True
    adj = adjacency(n, edges)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


def random_connected(n: int, extra: int, rng) -> set[tuple[int, int]]:
    order = rng.shuffled(range(n))
    edges = set()
    for i in range(1, n):
        u, v = order[i], order[rng.below(i)]
        edges.add((min(u, v), max(u, v)))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    for e in rng.sample(pairs, min(extra, len(pairs))):
        edges.add(e)
    return edges


def relabel(n: int, edges, rng):
    perm = rng.shuffled(range(n))
    return perm, norm_edges((perm[u], perm[v]) for u, v in edges)


def graph_canvas(s, directed=False, labels=None, highlight=()):
    n = s["n"]
    size = 160 + 36 * n
    cv = Canvas(size, size)
    pos = circle_layout(n, size / 2 - MARGIN - 20, size / 2, size / 2)
    draw_graph(cv, n, s["edges"], pos, directed=directed, labels=labels, highlight=highlight)
    return cv


def graph_text(s, weighted=False) -> str:
    if weighted:
        es = ", ".join(f"{u}-{v} ({w})" for u, v, w in s["edges"])
    else:
        es = ", ".join(f"{u}-{v}" for u, v in s["edges"])
    return f"The graph has vertices 0 to {s['n'] - 1} and edges: {es}."


# -- Eulerian ------------------------------------------------------------------


def odd_vertices(n, edges):
    deg = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return [x for x in range(n) if deg[x] % 2]


def hierholzer(n, edges, start):
    adj = [[] for _ in range(n)]
    for i, (u, v) in enumerate(edges):
        adj[u].append((v, i))
        adj[v].append((u, i))
    for a in adj:
        a.sort(reverse=True)  # pop() then yields the smallest neighbour
    used = [False] * len(edges)
    stack, walk = [start], []
    while stack:
        x = stack[-1]
        while adj[x] and used[adj[x][-1][1]]:
            adj[x].pop()
        if adj[x]:
            y, i = adj[x].pop()
            used[i] = True
            stack.append(y)
        else:
            walk.append(stack.pop())
    return walk[::-1]


def solve_eulerian(n, edges, kind):
    """Walk as a vertex list, or None when no walk of this kind exists.

    Isolated vertices are ignored: only the vertices that carry edges must be connected.
    """
    if not edges:
        return None
    used = sorted({x for e in edges for x in e})
    index = {v: i for i, v in enumerate(used)}
    if not is_connected(len(used), [(index[u], index[v]) for u, v in edges]):
        return None
    odd = odd_vertices(n, edges)
    if kind == "cycle":
        if odd:
            return None
        return hierholzer(n, edges, used[0])
    if len(odd) not in (0, 2):
        return None
    return hierholzer(n, edges, odd[0] if odd else used[0])


def check_walk_covers(n, edges, walk, closed):
    require(all(isinstance(x, int) and 0 <= x < n for x in walk), "rule_violation", "unknown vertex")
    if closed and walk and walk[0] != walk[-1]:
        walk = list(walk) + [walk[0]]
    remaining = Counter((min(u, v), max(u, v)) for u, v in edges)
    for a, b in zip(walk, walk[1:]):
        e = (min(a, b), max(a, b))
        require(remaining[e] > 0, "rule_violation", f"edge {a}-{b} missing or reused")
        remaining[e] -= 1
    require(sum(remaining.values()) == 0, "incomplete", "edges left unused")


class EulerianBase(TaskBase):
    category = "Graph"
    verify_mode = "simulate"
    kind = "cycle"
    levels = graph_levels(extra=lambda k: 2 + k)
    schema = (("n", "json", "vertex count"), ("edges", "json", "undirected edges"))
    size_keys = ("vertices", "extra")

    def generate(self, p, rng):
        n = p["vertices"]
        yes = rng.chance(YES_SHARE)
        edges = random_connected(n, rng.randint(p["extra"], p["extra"] + n // 2), rng)
        if yes:
            edges = self._fix_parity(n, edges, rng)
            if edges is None:
                return None
        s = {"n": n, "edges": norm_edges(edges)}
        walk = solve_eulerian(n, s["edges"], self.kind)
        if (walk is not None) != yes:
            return None
        if not yes and self.kind == "path" and len(odd_vertices(n, s["edges"])) < 4:
            return None
        return s, self.solve(s)

    def _fix_parity(self, n, edges, rng):
        edges = set(edges)
        for _ in range(4 * n):
            odd = odd_vertices(n, edges)
            allowed = 2 if self.kind == "path" else 0
            if len(odd) <= allowed:
                if self.kind == "path" and not odd:
                    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
                    if not pairs:
                        return None
                    edges.add(rng.choice(pairs))
                return edges
            a, b = rng.sample(odd, 2)
            e = (min(a, b), max(a, b))
            if e not in edges:
                edges.add(e)
            elif is_connected(n, edges - {e}):
                edges.discard(e)
            else:
                c = rng.choice([x for x in range(n) if x not in (a, b)])
                for f in ((min(a, c), max(a, c)), (min(b, c), max(b, c))):
                    edges ^= {f}
                if not is_connected(n, edges):
                    return None
        return None

    def solve(self, s):
        walk = solve_eulerian(s["n"], [tuple(e) for e in s["edges"]], self.kind)
        return G.Decision("No") if walk is None else G.Decision(G.NodeList(tuple(walk)))

    def check(self, s, truth, ans):
        if truth.value == "No":
            require(ans.value == "No", "wrong_value")
            return
        require(ans.value != "No", "wrong_value", "a walk exists")
        check_walk_covers(s["n"], [tuple(e) for e in s["edges"]], list(ans.value.items),
                          closed=self.kind == "cycle")

    def describe(self, s):
        return graph_text(s)

    def draw(self, s):
        return graph_canvas(s)

    def trace(self, s, sol):
        if sol.value == "No":
            odd = odd_vertices(s["n"], [tuple(e) for e in s["edges"]])
            return [step("key_calculation", f"Odd-degree vertices: {odd}.", str(len(odd))),
                    step("decision_point", "The degree condition fails, so no such walk exists.", "No")]
        w = sol.value.items
        return [step("intermediate_state", f"Step {i + 1}: traverse edge {a}-{b}, now at {b}.", str(b))
                for i, (a, b) in enumerate(zip(w, w[1:]))]


@register_task
class EulerianCycle(EulerianBase):
    name = "eulerian_cycle"
    title = "Eulerian Cycle"
    kind = "cycle"
    rules = ("Given the undirected, connected graph, decide whether there is a closed walk that "
             "uses every edge exactly once. If there is, output it as a vertex list that starts "
             "and ends at the same vertex. Otherwise output 'No'.")
    answer_format = "a list such as [0, 1, 2, 0], or No."


@register_task
class EulerianPath(EulerianBase):
    name = "eulerian_path"
    title = "Eulerian Path"
    kind = "path"
    rules = ("Given the undirected, connected graph, decide whether there is a walk that uses "
             "every edge exactly once. If there is, output it as a vertex list. Otherwise output "
             "'No'.")
    answer_format = "a list such as [0, 1, 2, 3], or No."


# -- Hamiltonian -----------------------------------------------------------------


def solve_hamiltonian(n, edges, kind, start=None):
    adj = adjacency(n, edges)
    adjs = [set(a) for a in adj]
    starts = [start] if start is not None else ([0] if kind == "cycle" else list(range(n)))

    def reachable_ok(path, visited):
        # every unvisited vertex must still be reachable from the path end
        left = n - len(path)
        if left == 0:
            return True
        seen = set()
        stack = [path[-1]]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in visited and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == left

    def dfs(path, visited):
        if len(path) == n:
            return kind == "path" or path[0] in adjs[path[-1]]
        if not reachable_ok(path, visited):
            return False
        for y in adj[path[-1]]:
            if y not in visited:
                path.append(y)
                visited.add(y)
                if dfs(path, visited):
                    return True
                visited.discard(y)
                path.pop()
        return False

    for s0 in starts:
        path = [s0]
        if dfs(path, {s0}):
            return path
    return None


class HamiltonianBase(TaskBase):
    category = "Graph"
    verify_mode = "simulate"
    kind = "cycle"
    levels = graph_levels(extra=lambda k: 2 + k)
    size_keys = ("vertices", "extra")

    def generate(self, p, rng):
        n = p["vertices"]
        yes = rng.chance(YES_SHARE)
        start = rng.below(n) if self.kind == "path" else None
        if yes:
            order = rng.shuffled(range(n))
            if start is not None:
                order.remove(start)
                order.insert(0, start)
            edges = {(min(a, b), max(a, b)) for a, b in zip(order, order[1:])}
            if self.kind == "cycle":
                edges.add((min(order[0], order[-1]), max(order[0], order[-1])))
            pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
            edges |= set(rng.sample(pairs, min(len(pairs), rng.randint(1, p["extra"]))))
        else:
            edges = random_connected(n, rng.randint(p["extra"], p["extra"] + 2), rng)
            deg = Counter(x for e in edges for x in e)
            if self.kind == "cycle" and min(deg[x] for x in range(n)) < 2:
                return None
        s = {"n": n, "edges": norm_edges(edges)}
        if start is not None:
            s["start"] = start
        found = solve_hamiltonian(n, s["edges"], self.kind, start)
        if (found is not None) != yes:
            return None
        return s, G.Decision(G.NodeList(tuple(found))) if found else G.Decision("No")

    def solve(self, s):
        found = solve_hamiltonian(s["n"], s["edges"], self.kind, s.get("start"))
        return G.Decision(G.NodeList(tuple(found))) if found else G.Decision("No")

    def check(self, s, truth, ans):
        if truth.value == "No":
            require(ans.value == "No", "wrong_value")
            return
        require(ans.value != "No", "wrong_value", "a Hamiltonian walk exists")
        seq = list(ans.value.items)
        n = s["n"]
        if self.kind == "cycle" and len(seq) == n + 1 and seq[0] == seq[-1]:
            seq = seq[:-1]
        require(len(seq) == n, "incomplete" if len(seq) < n else "rule_violation")
        require(sorted(seq) == list(range(n)), "rule_violation", "vertices not visited exactly once")
        es = {tuple(e) for e in s["edges"]}
        closing = [(seq[-1], seq[0])] if self.kind == "cycle" else []
        for a, b in list(zip(seq, seq[1:])) + closing:
            require((min(a, b), max(a, b)) in es, "rule_violation", f"no edge {a}-{b}")
        if self.kind == "path":
            require(seq[0] == s["start"], "rule_violation", "wrong start vertex")

    def describe(self, s):
        return graph_text(s)

    def draw(self, s):
        return graph_canvas(s, highlight=(s["start"],) if "start" in s else ())

    def trace(self, s, sol):
        if sol.value == "No":
            return [step("decision_point", "Exhaustive search with reachability pruning finds no "
                         "Hamiltonian walk.", "No")]
        seq = sol.value.items
        return [step("intermediate_state", f"Visit {v}; {i + 1} of {s['n']} vertices covered.", str(v))
                for i, v in enumerate(seq)]


@register_task
class HamiltonianCycle(HamiltonianBase):
    name = "hamiltonian_cycle"
    title = "Hamiltonian Cycle"
    kind = "cycle"
    schema = (("n", "json", "vertex count"), ("edges", "json", "undirected edges"))
    rules = ("Given the undirected, connected graph, decide whether there is a cycle that visits "
             "every vertex exactly once. If there is, output the vertices in cycle order. "
             "Otherwise output 'No'.")
    answer_format = "a list such as [0, 1, 2, 3], or No."


@register_task
class HamiltonianPath(HamiltonianBase):
    name = "hamiltonian_path"
    title = "Hamiltonian Path"
    kind = "path"
    schema = (("n", "json", "vertex count"), ("edges", "json", "undirected edges"),
              ("start", "json", "required start vertex"))
    rules = ("Given the undirected graph, decide whether there is a path that starts at the marked "
             "vertex and visits every vertex exactly once. If there is, output it. Otherwise "
             "output 'No'.")
    answer_format = "a list such as [0, 1, 2, 3], or No."

    def describe(self, s):
        return graph_text(s) + f" The path must start at vertex {s['start']}."


# -- isomorphism -----------------------------------------------------------------


def refine_colors(n, edges, init=None):
    adj = adjacency(n, edges)
    col = list(init) if init is not None else [len(a) for a in adj]
    for _ in range(n):
        sig = [(col[v], tuple(sorted(col[u] for u in adj[v]))) for v in range(n)]
        table = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [table[s] for s in sig]
        if len(set(new)) == len(set(col)):
            return new
        col = new
    return col


def find_isomorphism(n, e1, e2):
    """A vertex bijection mapping e1 onto e2, or None."""
    if len(e1) != len(e2):
        return None
    # refine both graphs jointly so colour ids are comparable
    union = [tuple(e) for e in e1] + [(u + n, v + n) for u, v in e2]
    col = refine_colors(2 * n, union)
    c1, c2 = col[:n], col[n:]
    if sorted(c1) != sorted(c2):
        return None
    a1 = [set(a) for a in adjacency(n, e1)]
    a2 = [set(a) for a in adjacency(n, e2)]
    order = sorted(range(n), key=lambda v: (Counter(c1)[c1[v]], -len(a1[v]), v))
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def rec(i):
        if i == n:
            return True
        v = order[i]
        for w in range(n):
            if w in used or c2[w] != c1[v]:
                continue
            if all((u in a1[v]) == (mapping[u] in a2[w]) for u in mapping):
                mapping[v] = w
                used.add(w)
                if rec(i + 1):
                    return True
                del mapping[v]
                used.discard(w)
        return False

    return dict(mapping) if rec(0) else None


def _crosses(e, f):
    a, b = e
    c, d = f
    if len({a, b, c, d}) < 4:
        return False
    return (a < c < b) != (a < d < b)


def random_outerplanar(n, rng, chords):
    edges = {(i, i + 1) for i in range(n - 1)} | {(0, n - 1)}
    cands = [(u, v) for u in range(n) for v in range(u + 2, n) if (u, v) != (0, n - 1)]
    for e in rng.shuffled(cands)[:4 * n]:
        if len(edges) >= n + chords:
            break
        if not any(_crosses(e, f) for f in edges):
            edges.add(e)
    for e in rng.shuffled(sorted(edges)):
        if rng.chance(0.25) and is_connected(n, edges - {e}):
            edges.discard(e)
    return edges


@register_task
class GraphIsomorphism(TaskBase):
    name = "graph_isomorphism"
    title = "Graph Isomorphism"
    category = "Graph"
    verify_mode = "exact_match"
    levels = {k: {"vertices": 2 + 2 * k, "chords": k} for k in range(1, 6)}
    schema = (("n", "json", "vertex count of each graph"), ("edges1", "json", "edges of G1"),
              ("edges2", "json", "edges of G2"))
    size_keys = ("vertices",)
    rules = ("Two connected, undirected planar graphs G1 and G2 are shown. Decide whether they are "
             "isomorphic, i.e. whether some relabelling of the vertices of G1 gives exactly G2.")
    answer_format = "Yes or No."

    def generate(self, p, rng):
        n = p["vertices"]
        g1 = random_outerplanar(n, rng, p["chords"])
        if rng.chance(0.5):
            g2 = set(g1)
        else:
            g2 = self._perturb(n, g1, rng)
            if g2 is None:
                return None
        _, e1 = relabel(n, g1, rng)
        _, e2 = relabel(n, g2, rng)
        s = {"n": n, "edges1": e1, "edges2": e2}
        return s, self.solve(s)

    def _perturb(self, n, g, rng):
        es = sorted(g)
        # prefer a degree-preserving swap so simple invariants do not decide it
        for _ in range(30):
            (a, b), (c, d) = rng.sample(es, 2)
            if len({a, b, c, d}) < 4:
                continue
            new = [tuple(sorted(x)) for x in ((a, d), (c, b))]
            if any(x in g for x in new):
                continue
            h = (g - {(a, b), (c, d)}) | set(new)
            if is_connected(n, h) and not any(_crosses(x, y) for x in new for y in h if x != y):
                if find_isomorphism(n, sorted(g), sorted(h)) is None:
                    return h
        for _ in range(30):
            e = rng.choice(es)
            absent = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in g]
            f = rng.choice(absent)
            h = (g - {e}) | {f}
            if is_connected(n, h) and not any(_crosses(f, y) for y in h if y != f):
                if find_isomorphism(n, sorted(g), sorted(h)) is None:
                    return h
        return None

    def solve(self, s):
        iso = find_isomorphism(s["n"], [tuple(e) for e in s["edges1"]], [tuple(e) for e in s["edges2"]])
        return G.Decision("Yes" if iso is not None else "No")

    def describe(self, s):
        e1 = ", ".join(f"{u}-{v}" for u, v in s["edges1"])
        e2 = ", ".join(f"{u}-{v}" for u, v in s["edges2"])
        return (f"Both graphs have vertices 0 to {s['n'] - 1}. G1 edges: {e1}. G2 edges: {e2}.")

    def draw(self, s):
        n = s["n"]
        size = 160 + 36 * n
        cv = Canvas(2 * size, size + 40)
        for k, key in enumerate(("edges1", "edges2")):
            pos = circle_layout(n, size / 2 - MARGIN - 20, size / 2 + k * size, size / 2 + 40)
            draw_graph(cv, n, s[key], pos)
            cv.text(size / 2 + k * size, 24, f"G{k + 1}", size=22)
        return cv

    def trace(self, s, sol):
        deg1 = sorted(len(a) for a in adjacency(s["n"], s["edges1"]))
        deg2 = sorted(len(a) for a in adjacency(s["n"], s["edges2"]))
        steps = [step("state_reading", f"G1 has {len(s['edges1'])} edges, G2 has {len(s['edges2'])}.",
                      f"{len(s['edges1'])}/{len(s['edges2'])}"),
                 step("key_calculation", f"Degree sequences: G1 {deg1}, G2 {deg2}.",
                      "equal" if deg1 == deg2 else "different")]
        if sol.value == "Yes":
            iso = find_isomorphism(s["n"], s["edges1"], s["edges2"])
            m = ", ".join(f"{a}->{b}" for a, b in sorted(iso.items()))
            steps.append(step("decision_point", f"Vertex mapping preserving all edges: {m}.", "Yes"))
        else:
            steps.append(step("decision_point", "No bijection preserves adjacency.", "No"))
        return steps


# -- max flow ----------------------------------------------------------------------


def max_flow(n, edges, s, t):
    """Edmonds-Karp (shortest augmenting paths); returns (value, paths)."""
    cap = [dict() for _ in range(n)]
    for u, v, c in edges:
        cap[u][v] = cap[u].get(v, 0) + c
        cap[v].setdefault(u, 0)
    flow = 0
    paths = []
    while True:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            x = q.popleft()
            for y in sorted(cap[x]):
                if y not in parent and cap[x][y] > 0:
                    parent[y] = x
                    q.append(y)
        if t not in parent:
            return flow, paths
        path = [t]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        b = min(cap[a][c] for a, c in zip(path, path[1:]))
        for a, c in zip(path, path[1:]):
            cap[a][c] -= b
            cap[c][a] += b
        flow += b
        paths.append((path, b))


@register_task
class MaxFlow(TaskBase):
    name = "max_flow"
    title = "Max Flow"
    category = "Graph"
    verify_mode = "exact_match"
    levels = {k: {"layers": 2 + k, "max_width": 2 + (k + 1) // 2, "max_capacity": 20}
              for k in range(1, 6)}
    schema = (("n", "json", "vertex count"), ("edges", "json", "directed edges [from, to, capacity]"),
              ("source", "json", "source"), ("sink", "json", "sink"), ("layers", "json", "layer of each vertex"))
    size_keys = ("layers", "max_width")
    rules = ("The layered directed acyclic graph has a capacity on every edge. Compute the maximum "
             "flow from the source to the sink.")
    answer_format = "the maximum flow value as an integer."

    def generate(self, p, rng):
        widths = [1] + [rng.randint(1, p["max_width"]) for _ in range(p["layers"] - 2)] + [1]
        layers, layer_of = [], []
        for i, w in enumerate(widths):
            layers.append(list(range(len(layer_of), len(layer_of) + w)))
            layer_of += [i] * w
        edges = set()
        for a, b in zip(layers, layers[1:]):
            for u in a:
                for v in rng.sample(b, rng.randint(1, len(b))):
                    edges.add((u, v))
            for v in b:
                if not any((u, v) in edges for u in a):
                    edges.add((rng.choice(a), v))
        n = len(layer_of)
        es = [[u, v, rng.randint(1, p["max_capacity"])] for u, v in sorted(edges)]
        s = {"n": n, "edges": es, "source": 0, "sink": n - 1, "layers": layer_of}
        return s, self.solve(s)

    def solve(self, s):
        return G.Scalar(Fraction(max_flow(s["n"], s["edges"], s["source"], s["sink"])[0]))

    def check(self, s, truth, ans):
        require(ans.value == truth.value, "wrong_value")

    def describe(self, s):
        es = ", ".join(f"{u}->{v} (capacity {c})" for u, v, c in s["edges"])
        return f"Source {s['source']}, sink {s['sink']}. Edges: {es}."

    def draw(self, s):
        layer_of = s["layers"]
        nl = max(layer_of) + 1
        by_layer = [[v for v in range(s["n"]) if layer_of[v] == i] for i in range(nl)]
        h = 120 * max(map(len, by_layer)) + 40
        cv = Canvas(160 * nl + 40, h)
        pos = {}
        for i, vs in enumerate(by_layer):
            for j, v in enumerate(vs):
                pos[v] = (100 + 160 * i, round(h * (j + 1) / (len(vs) + 1), 2))
        draw_graph(cv, s["n"], s["edges"], pos, directed=True, labels=lambda e: e[2],
                   highlight=(s["source"], s["sink"]))
        return cv

    def trace(self, s, sol):
        _, paths = max_flow(s["n"], s["edges"], s["source"], s["sink"])
        steps, total = [], 0
        for path, b in paths:
            total += b
            steps.append(step("intermediate_state", f"Augment along {'->'.join(map(str, path))} by {b}; "
                              f"flow is now {total}.", str(total)))
        return steps


# -- shortest distance --------------------------------------------------------------


def dijkstra(n, edges, src):
    adj = [[] for _ in range(n)]
    for u, v, w in edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist = [None] * n
    pq = [(0, src)]
    order = []
    while pq:
        d, x = heapq.heappop(pq)
        if dist[x] is not None:
            continue
        dist[x] = d
        order.append((x, d))
        for y, w in adj[x]:
            if dist[y] is None:
                heapq.heappush(pq, (d + w, y))
    return dist, order


@register_task
class ShortestDistance(TaskBase):
    name = "shortest_distance"
    title = "Shortest Distance"
    category = "Graph"
    verify_mode = "exact_match"
    levels = graph_levels(extra=lambda k: 1 + k, max_weight=lambda k: 9)
    schema = (("n", "json", "vertex count"), ("edges", "json", "weighted edges [u, v, weight]"),
              ("source", "json", "start vertex"), ("target", "json", "end vertex"))
    size_keys = ("vertices", "extra")
    rules = "Given the weighted undirected graph, find the length of the shortest path between the two named vertices."
    answer_format = "a number (integer or decimal)."

    def generate(self, p, rng):
        n = p["vertices"]
        edges = random_connected(n, rng.randint(p["extra"], p["extra"] + n // 2), rng)
        es = [[u, v, rng.randint(1, p["max_weight"])] for u, v in sorted(edges)]
        hops = [None] * n
        hops[0] = 0
        q = deque([0])
        adj = adjacency(n, [e[:2] for e in es])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if hops[y] is None:
                    hops[y] = hops[x] + 1
                    q.append(y)
        far = max(hops)
        if far < 2:
            return None
        t = rng.choice([v for v in range(n) if hops[v] == far])
        s = {"n": n, "edges": es, "source": 0, "target": t}
        return s, self.solve(s)

    def solve(self, s):
        dist, _ = dijkstra(s["n"], s["edges"], s["source"])
        if dist[s["target"]] is None:
            raise ValueError("target unreachable")
        return G.Scalar(Fraction(dist[s["target"]]))

    def check(self, s, truth, ans):
        require(abs(ans.value - truth.value) <= Fraction(1, 10 ** 9), "wrong_value")

    def describe(self, s):
        return graph_text(s, weighted=True) + f" Find the shortest distance from node {s['source']} to node {s['target']}."

    def draw(self, s):
        return graph_canvas(s, labels=lambda e: e[2], highlight=(s["source"], s["target"]))

    def trace(self, s, sol):
        _, order = dijkstra(s["n"], s["edges"], s["source"])
        steps = []
        for x, d in order:
            steps.append(step("intermediate_state", f"Settle node {x} at distance {d}.", str(d)))
            if x == s["target"]:
                break
        return steps


# -- topological sort ------------------------------------------------------------------


def kahn(n, edges):
    indeg = [0] * n
    out = [[] for _ in range(n)]
    for u, v in edges:
        out[u].append(v)
        indeg[v] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        x = heapq.heappop(ready)
        order.append(x)
        for y in out[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                heapq.heappush(ready, y)
    if len(order) != n:
        raise ValueError("cycle detected")
    return order


@register_task
class TopologicalSort(TaskBase):
    name = "topological_sort"
    title = "Topological Sort"
    category = "Graph"
    verify_mode = "constraint_check"
    levels = graph_levels(density=lambda k: 0.3)
    schema = (("n", "json", "vertex count"), ("edges", "json", "directed edges [from, to]"))
    size_keys = ("vertices",)
    rules = ("Given the directed acyclic graph, list the vertices in an order where every edge "
             "points from an earlier vertex to a later one. Any valid order is accepted.")
    answer_format = "a list of vertex numbers such as [0, 1, 2, 3]."

    def generate(self, p, rng):
        n = p["vertices"]
        order = rng.shuffled(range(n))
        edges = set()
        for i in range(1, n):
            # each vertex gets at least one predecessor so the order is constrained
            j = rng.below(i)
            edges.add((order[j], order[i]))
            for k in range(i):
                if rng.chance(p["density"] / 2):
                    edges.add((order[k], order[i]))
        s = {"n": n, "edges": sorted([u, v] for u, v in edges)}
        return s, self.solve(s)

    def solve(self, s):
        return G.NodeList(tuple(kahn(s["n"], s["edges"])))

    def check(self, s, truth, ans):
        seq = list(ans.items)
        n = s["n"]
        require(len(seq) >= n, "incomplete")
        require(sorted(seq) == list(range(n)), "rule_violation", "not a permutation of the vertices")
        pos = {v: i for i, v in enumerate(seq)}
        for u, v in s["edges"]:
            require(pos[u] < pos[v], "rule_violation", f"edge {u}->{v} points backwards")

    def describe(self, s):
        es = ", ".join(f"{u}->{v}" for u, v in s["edges"])
        return f"Vertices 0 to {s['n'] - 1}; edges: {es}."

    def draw(self, s):
        return graph_canvas(s, directed=True)

    def trace(self, s, sol):
        return [step("intermediate_state", f"Take {v}: all of its predecessors are already placed.", str(v))
                for v in sol.items]
