"""GroundTruthModel Domain Object - The generating structural time series model.

Represents the SVAR-type process
    V^j_t = a_j V^j_{t-1} + sum_i c_i f_i(V^i_{t-tau_i}) + eta^j_t
with:
- A link list (i, tau, j, coefficient, function tag); autodependencies are links with i == j
- Per-variable noise specifications
- The observed/latent split of the variables
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import networkx as nx


class LinkFunction(str, Enum):
    """Functional form applied to the parent value of a link."""

    LINEAR = "linear"
    NONLIN_F1 = "nonlin_f1"


class NoiseDist(str, Enum):
    """Noise distribution of a variable."""

    GAUSS = "gauss"
    WEIBULL = "weibull"
    BINOM = "binom"


@dataclass(frozen=True)
class Link:
    """A causal link V^i_{t-tau} -> V^j_t.

    Attributes:
        i: Cause variable
        tau: Lag (0 for contemporaneous)
        j: Effect variable
        coeff: Non-zero coefficient
        func: Function tag applied to the cause

    Invariants:
        - tau >= 0, and tau > 0 when i == j
        - coeff != 0
    """

    i: int
    tau: int
    j: int
    coeff: float = 1.0
    func: LinkFunction = LinkFunction.LINEAR

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ValueError(f"Link lag must be non-negative. Got: {self.tau}")
        if self.i == self.j and self.tau == 0:
            raise ValueError(f"Contemporaneous self-link on variable {self.i} is not allowed")
        if self.coeff == 0:
            raise ValueError(f"Link ({self.i}, {self.tau}, {self.j}) has a zero coefficient")

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.i, self.tau, self.j)

    def to_dict(self) -> dict[str, Any]:
        return {
            "i": self.i,
            "tau": self.tau,
            "j": self.j,
            "coeff": self.coeff,
            "func": self.func.value,
        }


@dataclass(frozen=True)
class NoiseSpec:
    """Noise of one variable; scale is sigma (gauss, weibull) or n_bin (binom)."""

    dist: NoiseDist = NoiseDist.GAUSS
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale < 0:
            raise ValueError(f"Noise scale must be non-negative. Got: {self.scale}")
        if self.dist == NoiseDist.BINOM and (self.scale != int(self.scale) or int(self.scale) % 2):
            raise ValueError(f"Binomial noise needs an even integer n_bin. Got: {self.scale}")

    def to_dict(self) -> dict[str, Any]:
        return {"dist": self.dist.value, "scale": self.scale}


@dataclass(frozen=True)
class GroundTruthGraph:
    """Structure of the generating model without parameters.

    Attributes:
        n_vars_total: Number of variables including latent ones
        links: Set of (i, tau, j)
        observed: Observed variable indices in ascending order

    Invariants:
        - Contemporaneous links form a DAG
        - observed is a non-empty subset of range(n_vars_total)
    """

    n_vars_total: int
    links: frozenset[tuple[int, int, int]]
    observed: tuple[int, ...]

    def __post_init__(self) -> None:
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        if self.n_vars_total < 1:
            raise ValueError(f"Model needs at least one variable. Got: {self.n_vars_total}")

        for i, tau, j in self.links:
            if not (0 <= i < self.n_vars_total and 0 <= j < self.n_vars_total):
                raise ValueError(f"Link ({i}, {tau}, {j}) references an unknown variable")

        if not self.observed:
            raise ValueError("At least one variable must be observed")
        if list(self.observed) != sorted(set(self.observed)):
            raise ValueError(f"observed must be sorted and unique. Got: {self.observed}")
        if self.observed[0] < 0 or self.observed[-1] >= self.n_vars_total:
            raise ValueError(f"observed indices out of range. Got: {self.observed}")

        contemporaneous = nx.DiGraph()
        contemporaneous.add_nodes_from(range(self.n_vars_total))
        contemporaneous.add_edges_from((i, j) for i, tau, j in self.links if tau == 0)
        if not nx.is_directed_acyclic_graph(contemporaneous):
            cycle = nx.find_cycle(contemporaneous)
            raise ValueError(f"Contemporaneous links contain a cycle: {cycle}")

    @property
    def p_ts(self) -> int:
        """Maximum lag of any link (0 for a link-free model)."""
        return max((tau for _, tau, _ in self.links), default=0)

    @property
    def n_observed(self) -> int:
        return len(self.observed)

    @property
    def latent(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_vars_total) if v not in self.observed)

    def parents_of(self, j: int) -> list[tuple[int, int]]:
        """(i, tau) pairs with a link into variable j."""
        return sorted((i, tau) for i, tau, jj in self.links if jj == j)

    def contemporaneous_order(self) -> list[int]:
        """A topological order of the variables under contemporaneous links."""
        dag = nx.DiGraph()
        dag.add_nodes_from(range(self.n_vars_total))
        dag.add_edges_from((i, j) for i, tau, j in self.links if tau == 0)
        return list(nx.lexicographical_topological_sort(dag))


@dataclass
class GroundTruthModel:
    """Parameterised generating model.

    Attributes:
        n_vars: Total number of variables (observed and latent)
        links: Causal links including autodependencies
        observed: Observed variable indices
        noise: One NoiseSpec per variable

    Invariants:
        - At most one link per (i, tau, j)
        - len(noise) == n_vars
        - Binomial noise is used for all variables or for none

    Source of Truth: Model JSON written by the simulate subcommand
    """

    n_vars: int
    links: list[Link]
    observed: list[int]
    noise: list[NoiseSpec] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.noise:
            self.noise = [NoiseSpec() for _ in range(self.n_vars)]
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        keys = [link.key for link in self.links]
        if len(keys) != len(set(keys)):
            raise ValueError("GroundTruthModel has duplicate links")
        if len(self.noise) != self.n_vars:
            raise ValueError(
                f"GroundTruthModel needs one noise spec per variable "
                f"({self.n_vars}), got {len(self.noise)}"
            )
        binomial = [spec.dist == NoiseDist.BINOM for spec in self.noise]
        if any(binomial) and not all(binomial):
            raise ValueError("Binomial noise must be used for all variables or none")
        # Validates contemporaneous acyclicity and the observed set
        _ = self.graph

    @property
    def graph(self) -> GroundTruthGraph:
        return GroundTruthGraph(
            n_vars_total=self.n_vars,
            links=frozenset(link.key for link in self.links),
            observed=tuple(sorted(self.observed)),
        )

    @property
    def p_ts(self) -> int:
        return self.graph.p_ts

    @property
    def is_discrete(self) -> bool:
        return self.noise[0].dist == NoiseDist.BINOM

    @property
    def n_bin(self) -> int:
        return int(self.noise[0].scale) if self.is_discrete else 0

    @property
    def is_linear(self) -> bool:
        return all(link.func == LinkFunction.LINEAR for link in self.links)

    def links_into(self, j: int) -> list[Link]:
        return [link for link in self.links if link.j == j]

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the Model JSON format."""
        return {
            "n_vars": self.n_vars,
            "links": [link.to_dict() for link in sorted(self.links, key=lambda lk: lk.key)],
            "observed": sorted(self.observed),
            "noise": [spec.to_dict() for spec in self.noise],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GroundTruthModel:
        """Parse the Model JSON format.

        Raises:
            ValueError: On missing fields or invalid values
        """
        try:
            n_vars = int(data["n_vars"])
            links = [
                Link(
                    i=int(rec["i"]),
                    tau=int(rec["tau"]),
                    j=int(rec["j"]),
                    coeff=float(rec.get("coeff", 1.0)),
                    func=LinkFunction(rec.get("func", "linear")),
                )
                for rec in data.get("links", [])
            ]
            observed = [int(v) for v in data.get("observed", range(n_vars))]
            noise = [
                NoiseSpec(dist=NoiseDist(rec.get("dist", "gauss")), scale=float(rec.get("scale", 1.0)))
                for rec in data.get("noise", [])
            ]
        except KeyError as e:
            raise ValueError(f"Model JSON is missing field {e}") from e
        return cls(n_vars=n_vars, links=links, observed=observed, noise=noise)


def motivational_model(
    auto_coeff: float = 0.9,
    cross_coeff: float = 0.6,
) -> GroundTruthModel:
    """Three observed series X, Y, Z with a hidden contemporaneous confounder U of X and Y.

    Variables: X=0, Y=1, Z=2 observed; U=3 latent white noise. Links:
    X, Y, Z autodependent at lag 1; U_t -> X_t, U_t -> Y_t; Y_{t-1} -> Z_t.
    """
    links = [
        Link(0, 1, 0, auto_coeff),
        Link(1, 1, 1, auto_coeff),
        Link(2, 1, 2, auto_coeff),
        Link(3, 0, 0, cross_coeff),
        Link(3, 0, 1, cross_coeff),
        Link(1, 1, 2, cross_coeff),
    ]
    return GroundTruthModel(n_vars=4, links=links, observed=[0, 1, 2])


def majority_counterexample_model() -> GroundTruthModel:
    """Contemporaneous model on which adjacency-majority FCI misses the collider at F.

    Variables: A=0, B=1, C=2, D=3, E=4, F=5 observed; L1=6, L2=7 latent.
    D and E are separated only by {A, B, C} and A is adjacent to neither, so
    no subset of their adjacencies separates them. D -> F <- E is the
    unshielded collider.
    """
    a, b, c, d, e, f, l1, l2 = range(8)
    links = [
        Link(a, 0, b),
        Link(l1, 0, b),
        Link(a, 0, c),
        Link(l2, 0, c),
        Link(l1, 0, d),
        Link(c, 0, d),
        Link(l2, 0, e),
        Link(b, 0, e),
        Link(d, 0, f),
        Link(e, 0, f),
    ]
    return GroundTruthModel(n_vars=8, links=links, observed=[a, b, c, d, e, f])
