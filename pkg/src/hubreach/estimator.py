"""scikit-learn style wrapper around the nearest-hub analysis."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_communities, check_points
from .netgraph import DEFAULT_MAX_SNAP_KM, DEFAULT_MERGE_TOLERANCE_M, RoadGraph, build_graph, snap_point
from .routing import multi_source_labeling
from .scenario import ConfigurationError, HubClass, derate_range, stop_count


class HubAccessibility(TransformerMixin, BaseEstimator):
    """Network distance and recharge stops from any point to its nearest hub.

    ``fit`` takes the communities (hubs are those at or above
    ``hub_population_threshold``) and the road network; ``transform``
    returns the distance to the nearest hub as a column (NaN when no hub is
    reachable) and ``predict`` the recharge-stop count (-1 when
    unreachable).

    Parameters
    ----------
    hub_population_threshold : int
        Minimum population of a hub.
    range_km : float
        Stated vehicle range.
    derate_factor : float
        Fraction of the stated range usable in practice, in (0, 1].
    merge_tolerance_m, max_snap_km : float
        Graph building and point snapping tolerances.

    Attributes
    ----------
    graph_ : RoadGraph
    hub_ids_ : ndarray of int
        Ids of the communities acting as hubs that attach to the network.
    hub_classes_ : dict
        Community id to :class:`~hubreach.scenario.HubClass`.
    effective_range_km_ : float
    """

    def __init__(self, hub_population_threshold=5000, range_km=336.0, derate_factor=1.0,
                 merge_tolerance_m=DEFAULT_MERGE_TOLERANCE_M, max_snap_km=DEFAULT_MAX_SNAP_KM):
        self.hub_population_threshold = hub_population_threshold
        self.range_km = range_km
        self.derate_factor = derate_factor
        self.merge_tolerance_m = merge_tolerance_m
        self.max_snap_km = max_snap_km

    def fit(self, X, y=None, roads=None):
        if roads is None:
            raise ValueError("fit needs the road network: fit(X, roads=...)")
        if not self.range_km > 0:
            raise ValueError("range_km must be positive")
        communities = check_communities(X)
        graph = roads if isinstance(roads, RoadGraph) else build_graph(roads, self.merge_tolerance_m)
        hubs, snaps = [], []
        for c in communities:
            if c.population >= self.hub_population_threshold:
                snap = snap_point(graph, c.point, self.max_snap_km, community_id=c.id)
                if snap is not None:
                    hubs.append(c.id)
                    snaps.append(snap)
        if not hubs:
            raise ConfigurationError("no hub community attaches to the road network")
        self.graph_ = graph
        self.hub_ids_ = np.asarray(hubs, dtype=np.int64)
        self.hub_classes_ = {c.id: HubClass.of(c.population) for c in communities}
        self.labeling_ = multi_source_labeling(graph, snaps, hubs)
        self.effective_range_km_ = derate_range(self.range_km, self.derate_factor)
        self.n_features_in_ = 2
        return self

    def _query(self, X):
        check_is_fitted(self, "labeling_")
        pts = check_points(X)
        dist = np.full(len(pts), np.nan)
        hub = np.full(len(pts), -1, dtype=np.int64)
        for i, p in enumerate(pts):
            snap = snap_point(self.graph_, p, self.max_snap_km)
            if snap is None:
                continue
            d, h = self.labeling_.query(snap)
            if d is not None:
                dist[i], hub[i] = d, h
        return dist, hub

    def transform(self, X):
        """Distance in km to the nearest hub, shape (n, 1)."""
        return self._query(X)[0].reshape(-1, 1)

    def predict(self, X):
        """Recharge stops needed to reach the nearest hub; -1 when unreachable."""
        dist, _ = self._query(X)
        return np.array(
            [-1 if np.isnan(d) else stop_count(d, self.effective_range_km_) for d in dist],
            dtype=np.int64,
        )

    def nearest_hub(self, X):
        """Community id of the nearest hub; -1 when unreachable."""
        return self._query(X)[1]

