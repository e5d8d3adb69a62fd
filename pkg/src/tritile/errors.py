"""Exception hierarchy."""


class TritileError(Exception):
    pass


class GraphError(TritileError, ValueError):
    pass


class FormatError(TritileError, ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


class ConstructionError(TritileError):
    """A construction failed its own post-check."""


class NoSidonSet(TritileError):
    def __init__(self, n: int, d: int, nodes: int):
        super().__init__(f"no Sidon set of size {d} found in Z_{n} (searched {nodes} nodes)")
        self.n, self.d, self.nodes = n, d, nodes


class GadgetInfeasible(ConstructionError):
    def __init__(self, n: int, d: int, bound: int, exhausted: bool):
        how = "search space exhausted" if exhausted else f"search bound {bound} reached"
        super().__init__(f"no Q({n},{d}) gadget found: {how}")
        self.n, self.d, self.bound, self.exhausted = n, d, bound, exhausted


class BudgetExceeded(TritileError):
    def __init__(self, what: str, budget: int):
        super().__init__(f"{what} budget of {budget} exceeded")
        self.what, self.budget = what, budget
