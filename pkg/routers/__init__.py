from . import fan_router, gersten_router, ktheory_router, valuation_router
