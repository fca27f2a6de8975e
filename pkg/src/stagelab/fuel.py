"""Step budgets shared by every evaluator in the package."""


class FuelExhausted(Exception):
    pass


class Fuel:
    """A mutable step counter. ``tick`` raises once the budget is spent."""

    __slots__ = ("limit", "used")

    def __init__(self, limit):
        if limit < 1:
            raise ValueError("fuel must be positive, got %r" % (limit,))
        self.limit = limit
        self.used = 0

    @property
    def remaining(self):
        return self.limit - self.used

    def tick(self, n=1):
        if self.used + n > self.limit:
            self.used = self.limit
            raise FuelExhausted(self.limit)
        self.used += n
