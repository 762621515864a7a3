"""Hub-and-spoke EV accessibility over road networks."""

__version__ = "0.1.0"

__all__ = ["HubAccessibility", "__version__"]


def __getattr__(name):
    # keeps scikit-learn out of CLI start-up
    if name == "HubAccessibility":
        from .estimator import HubAccessibility

        return HubAccessibility
    raise AttributeError(name)
