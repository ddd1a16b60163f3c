"""Exception types shared across the toolkit."""


class InfeasibleError(Exception):
    """No parameter choice can satisfy the requested target within the caps."""
