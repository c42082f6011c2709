"""
Instance Generator Module

This module builds connected QUBO instances for reduction experiments: mostly
uniform coefficients with a controlled share of multiplied outliers, and a
small set of hub nodes that attract a share of the edges.

The six design factors and their low/high settings:

    1 ub               coefficient bound           10 / 100
    2 lin_mult         linear multiplier            5 / 10
    3 quad_mult        quadratic multiplier        10 / 20
    4 pct_quad_mult    share of quadratic entries   5% / 15%  multiplied
    5 pct_lin_mult     share of linear entries     10% / 20%  multiplied
    6 pct_lin_nonzero  share of nonzero linear      5% / 25%  terms

Randomness comes from numpy's PCG64 generator seeded with the config seed.
"""
import logging
from dataclasses import asdict, dataclass, replace

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import networkx as nx
import numpy as np
import pandas as pd

from app.models.qubo import QuboInstance
from app.utils.config import DEFAULT_SEED, HUB_EDGE_SHARE, HUB_FRACTION, LOG_FORMAT, LOG_LEVEL
from app.utils.errors import QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('generator')

FACTOR_NAMES = ('ub', 'lin_mult', 'quad_mult', 'pct_quad_mult', 'pct_lin_mult', 'pct_lin_nonzero')

# (low, high) per factor; percentages in whole percent
FACTOR_LEVELS = {
    1: (10, 100),
    2: (5, 10),
    3: (10, 20),
    4: (5, 15),
    5: (10, 20),
    6: (5, 25),
}

# Sixteen-run fractional factorial design, one row per test id
DESIGN_TABLE = {
    1: (10, 10, 20, 5, 10, 25),
    2: (100, 10, 20, 15, 20, 25),
    3: (10, 5, 20, 15, 10, 5),
    4: (100, 5, 20, 5, 20, 5),
    5: (10, 10, 10, 5, 20, 5),
    6: (100, 10, 10, 15, 10, 5),
    7: (10, 5, 10, 15, 20, 25),
    8: (100, 5, 10, 5, 10, 25),
    9: (100, 5, 10, 15, 20, 5),
    10: (10, 5, 10, 5, 10, 5),
    11: (100, 10, 10, 5, 20, 25),
    12: (10, 10, 10, 15, 10, 25),
    13: (100, 5, 20, 15, 10, 25),
    14: (10, 5, 20, 5, 20, 25),
    15: (100, 10, 20, 5, 10, 5),
    16: (10, 10, 20, 15, 20, 5),
}

SIZE_PRESETS = {
    'P1': (1000, 5000),
    'P2': (1000, 10000),
    'P3': (5000, 25000),
    'P4': (5000, 50000),
    'P5': (10000, 100000),
    'P6': (10000, 500000),
}


@dataclass
class GeneratorConfig:
    """Size, coefficient factors, hub topology and seed of one instance."""

    n: int
    edges: int
    ub: int
    lin_mult: int = 1
    quad_mult: int = 1
    pct_quad_mult: float = 0.0
    pct_lin_mult: float = 0.0
    pct_lin_nonzero: float = 1.0
    hub_fraction: float = HUB_FRACTION
    hub_edge_share: float = HUB_EDGE_SHARE
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n < 1:
            raise QuboInputError(f"Node count must be positive, got {self.n}")
        if self.edges < self.n - 1:
            raise QuboInputError(f"{self.edges} edges cannot connect {self.n} nodes")
        if self.edges > self.n * (self.n - 1) // 2:
            raise QuboInputError(f"{self.edges} edges exceed the complete graph on {self.n} nodes")
        if self.ub < 1:
            raise QuboInputError(f"Coefficient bound must be >= 1, got {self.ub}")
        if self.lin_mult < 1 or self.quad_mult < 1:
            raise QuboInputError("Multipliers must be >= 1")
        for name in ('pct_quad_mult', 'pct_lin_mult', 'pct_lin_nonzero', 'hub_fraction', 'hub_edge_share'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise QuboInputError(f"{name} must be in [0, 1], got {value}")

    def to_dict(self):
        return asdict(self)


def design_point(test_id):
    """
    Factor settings of one design row.

    Args:
        test_id (int): 1..16

    Returns:
        dict: The six factor settings, percentages as fractions
    """
    if test_id not in DESIGN_TABLE:
        raise QuboInputError(f"Test id must be in 1..16, got {test_id}")
    ub, lin_mult, quad_mult, pct_quad, pct_lin, pct_nonzero = DESIGN_TABLE[test_id]
    return {
        'ub': ub,
        'lin_mult': lin_mult,
        'quad_mult': quad_mult,
        'pct_quad_mult': pct_quad / 100,
        'pct_lin_mult': pct_lin / 100,
        'pct_lin_nonzero': pct_nonzero / 100,
    }


def size_preset(problem_id):
    """Return (n, edges) for P1..P6."""
    key = str(problem_id).upper()
    if key not in SIZE_PRESETS:
        raise QuboInputError(f"Unknown problem id {problem_id!r}; expected one of {', '.join(SIZE_PRESETS)}")
    return SIZE_PRESETS[key]


def make_config(problem_id, test_id, seed=DEFAULT_SEED, **overrides):
    """Combine a size preset and a design row into a GeneratorConfig."""
    n, edges = size_preset(problem_id)
    settings = {'n': n, 'edges': edges, **design_point(test_id), 'seed': seed}
    settings.update(overrides)
    return GeneratorConfig(**settings)


def uniform_config(n=500, density=0.10, ub=100, seed=DEFAULT_SEED):
    """Outlier-free config with uniform edges and dense nonzero linear terms."""
    edges = max(n - 1, int(round(density * n * (n - 1) / 2)))
    return GeneratorConfig(
        n=n, edges=edges, ub=ub, pct_lin_nonzero=1.0,
        hub_fraction=0.0, hub_edge_share=0.0, seed=seed,
    )


def _nonzero_uniform(rng, ub, size):
    magnitudes = rng.integers(1, ub + 1, size=size, dtype=np.int64)
    signs = rng.choice(np.array([-1, 1], dtype=np.int64), size=size)
    return magnitudes * signs


def _draw_topology(config, rng):
    """Spanning tree over a shuffled order, then hub-biased extra edges."""
    n = config.n
    order = rng.permutation(n)
    pairs = {}
    if n > 1:
        # node order[k] attaches to a uniformly chosen earlier node
        parents = (rng.random(n - 1) * np.arange(1, n)).astype(np.int64)
        for k, p in enumerate(parents, start=1):
            a, b = int(order[k]), int(order[p])
            pairs[(min(a, b), max(a, b))] = None

    remaining = config.edges - len(pairs)
    n_hubs = max(1, int(round(config.hub_fraction * n)))
    hubs = rng.choice(n, size=min(n_hubs, n), replace=False)
    while remaining > 0:
        size = max(1024, 2 * remaining)
        u = rng.integers(0, n, size=size)
        v = rng.integers(0, n, size=size)
        forced = rng.random(size) < config.hub_edge_share
        u[forced] = hubs[rng.integers(0, len(hubs), size=int(forced.sum()))]
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in pairs:
                continue
            pairs[key] = None
            remaining -= 1
            if remaining == 0:
                break
    return list(pairs), hubs


def generate(config):
    """
    Generate a connected instance with exactly ``config.edges`` edges.

    Args:
        config (GeneratorConfig): Size, factors and seed

    Returns:
        QuboInstance: The generated instance
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    pairs, hubs = _draw_topology(config, rng)

    quadratic = _nonzero_uniform(rng, config.ub, len(pairs))
    outliers = rng.random(len(pairs)) < config.pct_quad_mult
    quadratic[outliers] *= config.quad_mult

    linear = _nonzero_uniform(rng, config.ub, config.n)
    nonzero = rng.random(config.n) < config.pct_lin_nonzero
    multiplied = rng.random(config.n) < config.pct_lin_mult
    linear[multiplied] *= config.lin_mult
    linear[~nonzero] = 0

    instance = QuboInstance(config.n)
    for i, value in enumerate(linear.tolist()):
        instance.set_linear(i, value)
    for (i, j), value in zip(pairs, quadratic.tolist()):
        instance.set_quadratic(i, j, value)

    logger.info(
        f"Generated n={config.n}, edges={instance.edge_count}, seed={config.seed}: "
        f"{int(outliers.sum())} quadratic outliers, {int(nonzero.sum())} nonzero linear terms, "
        f"hub degrees up to {max((instance.degree(int(h)) for h in hubs), default=0)}"
    )
    return instance


def maxcut_instance(graph):
    """
    Unit-weight max-cut as a QUBO: c_ii = deg(i), c_ij = -2 per edge.

    Args:
        graph (nx.Graph): Nodes are relabelled 0..n-1 in sorted order

    Returns:
        QuboInstance: Objective equals the cut size of the assignment
    """
    nodes = sorted(graph.nodes())
    index = {node: k for k, node in enumerate(nodes)}
    instance = QuboInstance(len(nodes))
    for node in nodes:
        instance.set_linear(index[node], graph.degree(node))
    for a, b in graph.edges():
        if a != b:
            instance.set_quadratic(index[a], index[b], -2)
    return instance


def support_graph(instance):
    """Off-diagonal support of ``instance`` as a networkx graph over 0..n-1."""
    graph = nx.Graph()
    graph.add_nodes_from(range(instance.n))
    graph.add_edges_from((i, j) for i, j, _ in instance.quadratic_items())
    return graph


def is_connected(instance):
    if instance.n == 0:
        return True
    return nx.is_connected(support_graph(instance))


def component_count(instance):
    if instance.n == 0:
        return 0
    return nx.number_connected_components(support_graph(instance))


def histogram(instance, bin_width):
    """
    Count every coefficient (diagonal and off-diagonal) per bin.

    Args:
        instance (QuboInstance): The instance
        bin_width (int): Width of each bin, >= 1; bins start at multiples of it

    Returns:
        pd.Series: Counts indexed by bin lower edge, ascending
    """
    if bin_width < 1:
        raise QuboInputError(f"Bin width must be >= 1, got {bin_width}")
    values = np.asarray(instance.coefficient_values(), dtype=np.int64)
    bins, counts = np.unique((values // bin_width) * bin_width, return_counts=True)
    return pd.Series(counts, index=pd.Index(bins, name='bin'), name='count')


def plot_histograms(before, after, bin_width, path):
    """
    Side-by-side coefficient distributions before and after reduction.

    Args:
        before (QuboInstance): Original instance
        after (QuboInstance): Reduced instance
        bin_width (int): Histogram bin width
        path (str): Output PNG path
    """
    fig, axes = plt.subplots(1, 2, figsize=(12, 5), sharey=True)
    for ax, instance, title in ((axes[0], before, 'Before reduction'), (axes[1], after, 'After reduction')):
        series = histogram(instance, bin_width)
        ax.bar(series.index, series.values, width=bin_width * 0.9, align='edge')
        ax.set_yscale('log')
        ax.set_xlabel('Coefficient value')
        ax.set_title(f'{title} (n={instance.n})')
    axes[0].set_ylabel('Count')
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    logger.info(f"Saved coefficient histograms to {path}")


def with_seed(config, seed):
    """Copy of ``config`` with a different seed."""
    return replace(config, seed=seed)
