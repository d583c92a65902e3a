"""Car registry contract: agent-managed inventory and price estimation.

All mutating entry points validate every precondition before touching
state, so a revert leaves the registry exactly as it was.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from . import errors
from .errors import ContractError

if TYPE_CHECKING:
    from .state import WorldState

# Depreciation constants are deliberately hard-coded, not configurable,
# so price fixtures stay stable across deployments.
AGE_RETENTION = (9, 10)  # value kept per year of age
MILEAGE_LIMIT = 200_000  # price reaches zero at this many miles
TRADE_RETENTION = (95, 100)  # value kept per completed trade

# Capability token for settle_transfer; the auction engine passes it when
# settling. Nothing else may transfer ownership.
AUCTION_ENGINE = object()


@dataclass
class Car:
    car_id: int
    owner: bytes
    initial_price: int
    age_years: int
    miles: int
    accident_costs: list[int] = field(default_factory=list)
    trade_times: int = 0
    in_auction: bool = False


@dataclass
class CarRegistryState:
    agent: bytes
    cars: dict[int, Car] = field(default_factory=dict)
    next_id: int = 1

    def copy(self) -> "CarRegistryState":
        cars = {
            cid: Car(
                car_id=c.car_id,
                owner=c.owner,
                initial_price=c.initial_price,
                age_years=c.age_years,
                miles=c.miles,
                accident_costs=list(c.accident_costs),
                trade_times=c.trade_times,
                in_auction=c.in_auction,
            )
            for cid, c in self.cars.items()
        }
        return CarRegistryState(agent=self.agent, cars=cars, next_id=self.next_id)


def _require_car(registry: CarRegistryState, car_id: int) -> Car:
    car = registry.cars.get(car_id)
    if car is None:
        raise ContractError(errors.UNKNOWN_CAR, f"no car with id {car_id}")
    return car


def add_car(
    state: "WorldState",
    caller: bytes,
    owner: bytes,
    initial_price: int,
    age_years: int,
    miles: int,
) -> int:
    """Agent lists a new car; returns the sequentially assigned id."""
    registry = state.registry
    if caller != registry.agent:
        raise ContractError(errors.NOT_AGENT, "only the agent may add cars")
    if initial_price <= 0:
        raise ContractError(errors.BAD_PRICE, "initial price must be positive")
    car_id = registry.next_id
    registry.next_id += 1
    registry.cars[car_id] = Car(
        car_id=car_id,
        owner=owner,
        initial_price=initial_price,
        age_years=age_years,
        miles=miles,
    )
    state.emit(
        "CarAdded",
        {
            "car_id": car_id,
            "owner": owner.hex(),
            "initial_price": initial_price,
            "age_years": age_years,
            "miles": miles,
        },
    )
    return car_id


def upload_accident_cost(state: "WorldState", caller: bytes, car_id: int, cost: int) -> None:
    registry = state.registry
    if caller != registry.agent:
        raise ContractError(errors.NOT_AGENT, "only the agent may record accidents")
    car = _require_car(registry, car_id)
    if cost <= 0:
        raise ContractError(errors.BAD_COST, "accident cost must be positive")
    if car.in_auction:
        raise ContractError(errors.CAR_IN_AUCTION, "car is in an open auction")
    car.accident_costs.append(cost)
    state.emit(
        "AccidentRecorded",
        {"car_id": car_id, "cost": cost, "total_accident_cost": sum(car.accident_costs)},
    )


def get_owner(registry: CarRegistryState, car_id: int) -> bytes:
    return _require_car(registry, car_id).owner


def get_car_info(registry: CarRegistryState, car_id: int) -> Car:
    return _require_car(registry, car_id)


def estimate_price(car: Car) -> int:
    """Deterministic price estimate, integer floor at every step:
    10% off per year of age, linear mileage decay to zero at the
    mileage limit, accident costs deducted, then 5% off per trade."""
    price = car.initial_price
    for _ in range(car.age_years):
        price = price * AGE_RETENTION[0] // AGE_RETENTION[1]
    price = price * max(0, MILEAGE_LIMIT - car.miles) // MILEAGE_LIMIT
    price = max(0, price - sum(car.accident_costs))
    for _ in range(car.trade_times):
        price = price * TRADE_RETENTION[0] // TRADE_RETENTION[1]
    return price


def calculate_price(registry: CarRegistryState, car_id: int) -> int:
    return estimate_price(_require_car(registry, car_id))


def settle_transfer(state: "WorldState", car_id: int, new_owner: bytes, caller: object = None) -> None:
    """Ownership transfer at auction settlement. Only the auction engine
    may call (it passes the AUCTION_ENGINE token)."""
    if caller is not AUCTION_ENGINE:
        raise ContractError(errors.CALLER_NOT_AUCTION_ENGINE, "settlement is auction-engine only")
    car = _require_car(state.registry, car_id)
    if not car.in_auction:
        raise ContractError(errors.NOT_IN_AUCTION, "car has no open auction")
    car.owner = new_owner
    car.trade_times += 1
    car.in_auction = False
    state.emit(
        "OwnerChanged",
        {"car_id": car_id, "new_owner": new_owner.hex(), "trade_times": car.trade_times},
    )
