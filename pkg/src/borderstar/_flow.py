"""Shortest-augmenting-path max flow over exact rational capacities."""

from __future__ import annotations

from collections import deque
from fractions import Fraction


class FlowNetwork:
    """Directed network on nodes ``0..size-1`` with Fraction capacities.

    Neighbours are scanned in edge-insertion order, so with nodes added in
    index order the breadth-first search prefers the lowest node index.
    """

    def __init__(self, size: int):
        self.size = size
        self.adj = [[] for _ in range(size)]
        self.cap = {}
        self.flow = {}

    def add_edge(self, u: int, v: int, capacity: Fraction):
        if (u, v) in self.cap:
            self.cap[(u, v)] += capacity
            return
        self.cap[(u, v)] = Fraction(capacity)
        self.flow[(u, v)] = Fraction(0)
        if (v, u) not in self.cap:
            self.cap[(v, u)] = Fraction(0)
            self.flow[(v, u)] = Fraction(0)
            self.adj[u].append(v)
            self.adj[v].append(u)

    def residual(self, u, v) -> Fraction:
        return self.cap[(u, v)] - self.flow[(u, v)]

    def _bfs(self, s):
        parent = [-1] * self.size
        parent[s] = s
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if parent[v] == -1 and self.residual(u, v) > 0:
                    parent[v] = u
                    queue.append(v)
        return parent

    def max_flow(self, s: int, t: int) -> Fraction:
        total = Fraction(0)
        while True:
            parent = self._bfs(s)
            if parent[t] == -1:
                return total
            path = []
            v = t
            while v != s:
                path.append((parent[v], v))
                v = parent[v]
            delta = min(self.residual(u, v) for u, v in path)
            for u, v in path:
                self.flow[(u, v)] += delta
                self.flow[(v, u)] -= delta
            total += delta

    def source_side(self, s: int) -> set:
        """Nodes reachable from ``s`` in the residual graph (a minimum cut)."""
        parent = self._bfs(s)
        return {v for v in range(self.size) if parent[v] != -1}

    def cut_value(self, side: set) -> Fraction:
        return sum(
            (c for (u, v), c in self.cap.items() if u in side and v not in side),
            Fraction(0),
        )
