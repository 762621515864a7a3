"""Input coercion for the estimator API."""

import numpy as np

from .ingest import COMMUNITY_COLUMNS, CommunityRecord


def check_points(X):
    """Coerce ``X`` to a float array of shape (n, 2) holding (lat, lon) rows.

    Accepts an array-like, a DataFrame with ``latitude``/``longitude``
    columns, or a sequence of :class:`~hubreach.ingest.CommunityRecord`.
    """
    if hasattr(X, "columns"):
        X = X[["latitude", "longitude"]].to_numpy()
    elif len(X) and isinstance(X[0], CommunityRecord):
        X = [c.point for c in X]
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) latitude/longitude array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    if np.any(np.abs(arr[:, 0]) > 90) or np.any(np.abs(arr[:, 1]) > 180):
        raise ValueError("coordinates out of range")
    return arr


def check_communities(X):
    """Coerce ``X`` to a list of :class:`~hubreach.ingest.CommunityRecord`.

    DataFrames need the communities CSV columns; plain arrays are read as
    (lat, lon, population) rows and get generated names.
    """
    if hasattr(X, "columns"):
        missing = set(COMMUNITY_COLUMNS) - set(X.columns)
        if missing:
            raise ValueError(f"missing columns {sorted(missing)}")
        rows = zip(X["name"], X["latitude"], X["longitude"], X["population"])
    elif len(X) and isinstance(X[0], CommunityRecord):
        return list(X)
    else:
        arr = np.asarray(X, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"expected (n, 3) lat/lon/population array, got shape {arr.shape}")
        rows = ((f"community-{i}", *row) for i, row in enumerate(arr))
    out = []
    for i, (name, lat, lon, pop) in enumerate(rows):
        if pop < 0 or int(pop) != pop:
            raise ValueError(f"row {i}: population must be a non-negative integer")
        out.append(CommunityRecord(i, str(name), float(lat), float(lon), int(pop)))
    check_points([c.point for c in out] or np.empty((0, 2)))
    return out
