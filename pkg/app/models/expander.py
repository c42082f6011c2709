"""
Graph Expansion Module

This module enforces a per-node degree cap m by splitting over-capacity
nodes into chains of strongly coupled copies. Coupling nodes i and k adds the
penalty M(x_i - 2 x_i x_k + x_k), M < 0, which is 0 when x_i == x_k and M
otherwise:

    c_ii += M,   c_kk = M,   c_ik = -2M

Each chain member reserves one slot per coupling edge; payload edges keep
their values when they move.
"""
import logging
from dataclasses import dataclass, field

from app.utils.config import LOG_FORMAT, LOG_LEVEL
from app.utils.errors import ExpansionError, QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('expander')


@dataclass
class ExpansionGroup:
    """An original node and the chain of nodes added for it, in coupling order."""

    original: int
    chain: list = field(default_factory=list)

    @property
    def members(self):
        return [self.original] + list(self.chain)


@dataclass
class ExpansionLog:
    """Groups, relocated edges per added node, and the penalty used."""

    original_n: int
    penalty: int
    groups: list = field(default_factory=list)
    moved_edges: dict = field(default_factory=dict)

    @property
    def added_nodes(self):
        return [k for group in self.groups for k in group.chain]

    def predecessor_map(self):
        """Added node -> the chain member it is coupled to."""
        predecessor = {}
        for group in self.groups:
            members = group.members
            for previous, node in zip(members, members[1:]):
                predecessor[node] = previous
        return predecessor

    def to_dict(self):
        """Serializable form with 1-based indices."""
        return {
            "original_n": self.original_n,
            "penalty": self.penalty,
            "groups": [
                {"original": g.original + 1, "chain": [k + 1 for k in g.chain]}
                for g in self.groups
            ],
            "moved_edges": {
                str(k + 1): [[j + 1, value] for j, value in edges]
                for k, edges in sorted(self.moved_edges.items())
            },
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                original_n=int(data["original_n"]),
                penalty=int(data["penalty"]),
                groups=[
                    ExpansionGroup(int(g["original"]) - 1, [int(k) - 1 for k in g["chain"]])
                    for g in data["groups"]
                ],
                moved_edges={
                    int(k) - 1: [(int(j) - 1, int(value)) for j, value in edges]
                    for k, edges in data["moved_edges"].items()
                },
            )
        except (KeyError, TypeError, ValueError) as e:
            raise QuboInputError(f"Malformed expansion log: {e}") from e


def default_penalty(instance):
    """
    Penalty large enough that every optimum satisfies every coupling.

    Returns:
        int: -(1 + sum of |c| over all stored coefficients)
    """
    return -(1 + instance.magnitude())


def strong_couple(instance, i, M, inplace=False):
    """
    Add a node k strongly coupled to node i.

    Args:
        instance (QuboInstance): The instance
        i (int): Node to couple
        M (int): Penalty, strictly negative
        inplace (bool): Mutate ``instance`` instead of a copy

    Returns:
        tuple: (instance with the new node, k)
    """
    if M >= 0:
        raise QuboInputError(f"Coupling penalty must be negative, got {M}")
    target = instance if inplace else instance.copy()
    target._check_index(i)
    k = target.add_variable(M)
    target.add_linear(i, M)
    target.set_quadratic(i, k, -2 * M)
    return target, k


def enforce_degree_cap(instance, m, penalty=None):
    """
    Split every node with more than m incident edges into a coupled chain.

    Each over-capacity node keeps its lowest-index neighbours; the
    highest-index excess edges move, unchanged in value, to a new node
    coupled to the chain's tail, repeating until every degree is <= m.

    Args:
        instance (QuboInstance): The instance (left unchanged)
        m (int): Maximum degree, >= 2
        penalty (int, optional): Coupling penalty; default_penalty otherwise

    Returns:
        tuple: (expanded QuboInstance, ExpansionLog)
    """
    if m < 2:
        raise QuboInputError(f"Degree cap must be at least 2, got {m}")
    M = default_penalty(instance) if penalty is None else penalty
    if M >= 0:
        raise QuboInputError(f"Coupling penalty must be negative, got {M}")

    expanded = instance.copy()
    log = ExpansionLog(original_n=instance.n, penalty=M)
    for i in range(instance.n):
        if expanded.degree(i) <= m:
            continue
        if m == 2:
            # a max-degree-2 group is a path with only two payload slots
            raise ExpansionError(
                f"Node {i + 1} has degree {expanded.degree(i)}; a cap of 2 cannot be met by chaining"
            )
        group = ExpansionGroup(original=i)
        tail, previous = i, None
        while expanded.degree(tail) > m:
            payload = sorted(j for j in expanded.neighbors(tail) if j != previous)
            keep = m - 1 if previous is None else m - 2
            excess = payload[keep:]
            _, k = strong_couple(expanded, tail, M, inplace=True)
            moved = []
            for j in excess:
                value = expanded.coefficient(tail, j)
                expanded.remove_quadratic(tail, j)
                expanded.set_quadratic(k, j, value)
                moved.append((j, value))
            log.moved_edges[k] = moved
            group.chain.append(k)
            logger.debug(f"Node {i}: coupled {tail} -> {k}, moved {len(moved)} edges")
            tail, previous = k, tail
        log.groups.append(group)

    logger.info(
        f"Degree cap {m}: n={instance.n} -> {expanded.n} "
        f"({len(log.groups)} nodes split, max degree {expanded.max_degree()})"
    )
    return expanded, log


def collapse(expanded, log):
    """
    Undo enforce_degree_cap: move edges back, drop couplings and added nodes.

    Returns:
        QuboInstance: An instance equal to the original
    """
    restored = expanded.copy()
    predecessor = log.predecessor_map()
    for k in sorted(predecessor, reverse=True):
        parent = predecessor[k]
        for j, value in list(restored.neighbors(k).items()):
            if j == parent:
                continue
            restored.remove_quadratic(k, j)
            restored.set_quadratic(parent, j, value)
        restored.remove_quadratic(parent, k)
        restored.add_linear(parent, -log.penalty)
    return restored.subinstance(list(range(log.original_n)))


def collapse_solution(log, assignment):
    """
    Project an expanded assignment onto the original nodes.

    Returns:
        tuple: (original assignment list, True when every group agrees)
    """
    values = [int(v) for v in assignment]
    expected = log.original_n + len(log.added_nodes)
    if len(values) != expected:
        raise QuboInputError(f"Assignment length {len(values)} does not match expanded n={expected}")
    consistent = all(
        len({values[member] for member in group.members}) == 1 for group in log.groups
    )
    if not consistent:
        logger.warning("Expanded assignment breaks at least one strong coupling")
    return values[:log.original_n], consistent
