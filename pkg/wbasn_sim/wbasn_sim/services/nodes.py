# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional

from wbasn_sim.wbasn_sim.exceptions import NodeStateError
from wbasn_sim.wbasn_sim.services.physiology import PhysioState
from wbasn_sim.wbasn_sim.services.radio_energy import RadioParams, receive_energy, transmit_energy
from wbasn_sim.wbasn_sim.utils import logger

INITIAL_NODE_ENERGY = 0.3  # J


class SensorKind(str, Enum):
    TEMPERATURE = "temperature"
    GLUCOSE = "glucose"
    HEARTBEAT = "heartbeat"


class Direction(str, Enum):
    RISING = "rising"
    FALLING = "falling"


class NodeState(str, Enum):
    ASLEEP = "asleep"
    DEAD = "dead"


class Decision(str, Enum):
    TRANSMIT = "transmit"
    SLEEP = "sleep"


class ReportMode(str, Enum):
    # hard threshold plus soft-threshold change since the last packet
    ON_CHANGE = "on_change"
    # hard threshold only, every sampling round
    CONTINUOUS = "continuous"


# PhysioState attribute each sensor reads
READING_FIELD = {
    SensorKind.TEMPERATURE: "temperature",
    SensorKind.GLUCOSE: "glucose",
    SensorKind.HEARTBEAT: "heart_rate",
}


@dataclass(frozen=True)
class NodeSpec:
    """
    Static description of one on-body sensor, as loaded from config.

    A fresh SensorNode is built from it for every run.
    """

    kind: SensorKind
    payload_bits: int
    distance: float
    hard_threshold: float
    soft_threshold: float
    direction: Direction
    sample_interval: int = 1
    initial_energy: float = INITIAL_NODE_ENERGY
    path_loss_exponent: Optional[float] = None

    def violations(self, prefix: Optional[str] = None) -> List[str]:
        prefix = prefix or f"node.{self.kind.value}"
        problems = []
        if self.payload_bits < 0:
            problems.append(f"{prefix}.payload_bits: must be >= 0 (got {self.payload_bits!r})")
        if not math.isfinite(self.distance) or self.distance < 0:
            problems.append(f"{prefix}.distance: must be finite and >= 0 (got {self.distance!r})")
        if not self.soft_threshold >= 0:
            problems.append(f"{prefix}.soft_threshold: must be >= 0 (got {self.soft_threshold!r})")
        if self.sample_interval < 1:
            problems.append(f"{prefix}.sample_interval: must be >= 1 (got {self.sample_interval!r})")
        if not math.isfinite(self.initial_energy) or self.initial_energy <= 0:
            problems.append(f"{prefix}.initial_energy: must be > 0 and finite (got {self.initial_energy!r})")
        n = self.path_loss_exponent
        if n is not None and (not math.isfinite(n) or not 2.0 <= n <= 6.0):
            problems.append(f"{prefix}.path_loss_exponent: must lie within [2.0, 6.0] (got {n!r})")
        return problems

    def build(self, node_id: int, report_mode: ReportMode = ReportMode.CONTINUOUS) -> "SensorNode":
        return SensorNode(
            id=node_id,
            kind=self.kind,
            payload_bits=self.payload_bits,
            distance_to_bs=self.distance,
            hard_threshold=self.hard_threshold,
            soft_threshold=self.soft_threshold,
            direction=self.direction,
            sample_interval=self.sample_interval,
            initial_energy=self.initial_energy,
            residual_energy=self.initial_energy,
            path_loss_exponent=self.path_loss_exponent,
            report_mode=report_mode,
        )


DEFAULT_NODES = (
    NodeSpec(SensorKind.TEMPERATURE, payload_bits=2400, distance=0.25,
             hard_threshold=37.5, soft_threshold=0.1, direction=Direction.RISING),
    NodeSpec(SensorKind.GLUCOSE, payload_bits=2400, distance=0.25,
             hard_threshold=70.0, soft_threshold=2.0, direction=Direction.FALLING, sample_interval=60),
    NodeSpec(SensorKind.HEARTBEAT, payload_bits=240, distance=0.60,
             hard_threshold=100.0, soft_threshold=2.0, direction=Direction.RISING),
)


@dataclass
class BaseStation:
    """
    Wrist-worn sink. Has no energy limit; it only keeps the books.

    Attributes:
        packets_received (Dict[SensorKind, int]): Delivered packets per sensor kind
        rx_energy_accounted (float): Receive energy the radio model charges for them (J)
        fatigue_reported (bool): Whether the fatigue state was seen
        fatigue_round (int): Round of the first fatigue observation
        latest_readings (Dict[SensorKind, float]): Last value received per sensor kind
    """

    packets_received: Dict[SensorKind, int] = field(default_factory=lambda: {kind: 0 for kind in SensorKind})
    rx_energy_accounted: float = 0.0
    fatigue_reported: bool = False
    fatigue_round: Optional[int] = None
    latest_readings: Dict[SensorKind, float] = field(default_factory=dict)

    @property
    def total_packets(self) -> int:
        return sum(self.packets_received.values())

    def receive(self, kind: SensorKind, bits: int, radio: RadioParams, value: Optional[float] = None) -> None:
        self.packets_received[kind] += 1
        self.rx_energy_accounted += receive_energy(radio, bits)
        if value is not None:
            self.latest_readings[kind] = value

    def report_fatigue(self, round_index: int, soldier_energy: float) -> None:
        """Record the first fatigue observation. Later calls are ignored."""
        if self.fatigue_reported:
            return
        self.fatigue_reported = True
        self.fatigue_round = round_index
        logger("nodes").info(f"Fatigue state reached at round {round_index} "
                             f"(soldier energy {soldier_energy:.3f} J)")


@dataclass
class SensorNode:
    """
    One on-body sensor.

    Sleeps until its reading crosses the hard threshold, then reports to the
    base station according to its report mode. Sensing and sleeping are free;
    only transmissions spend energy. A node that cannot afford a transmission
    dies instead of sending it.
    """

    id: int
    kind: SensorKind
    payload_bits: int
    distance_to_bs: float
    hard_threshold: float
    soft_threshold: float
    direction: Direction
    sample_interval: int = 1
    initial_energy: float = INITIAL_NODE_ENERGY
    residual_energy: float = INITIAL_NODE_ENERGY
    path_loss_exponent: Optional[float] = None
    report_mode: ReportMode = ReportMode.CONTINUOUS
    last_transmitted_value: Optional[float] = None
    state: NodeState = NodeState.ASLEEP
    tx_count: int = 0
    death_round: Optional[int] = None
    spent_energy: float = 0.0

    @property
    def is_alive(self) -> bool:
        return self.state is not NodeState.DEAD

    def is_sampling_round(self, round_index: int) -> bool:
        return round_index % self.sample_interval == 0

    def reading_from(self, physio: PhysioState) -> float:
        return getattr(physio, READING_FIELD[self.kind])

    def link_radio(self, radio: RadioParams) -> RadioParams:
        """Radio params for this node's link, honoring a per-node exponent override."""
        if self.path_loss_exponent is None:
            return radio
        return radio.with_exponent(self.path_loss_exponent)

    def tx_cost(self, radio: RadioParams) -> float:
        return transmit_energy(self.link_radio(radio), self.payload_bits, self.distance_to_bs)

    def beyond_hard_threshold(self, reading: float) -> bool:
        if self.direction is Direction.RISING:
            return reading >= self.hard_threshold
        return reading <= self.hard_threshold

    def decide(self, reading: float, round_index: int) -> Decision:
        """
        Apply the threshold rule to one sample.

        Args:
            reading (float): Sensed value in signal units
            round_index (int): Current round

        Returns:
            Decision: TRANSMIT or SLEEP

        Raises:
            NodeStateError: If the node is dead
        """
        if not self.is_alive:
            raise NodeStateError(f"node {self.id} ({self.kind.value}) is dead since round {self.death_round}")
        if not self.is_sampling_round(round_index):
            return Decision.SLEEP
        if not self.beyond_hard_threshold(reading):
            return Decision.SLEEP
        if self.report_mode is ReportMode.CONTINUOUS or self.last_transmitted_value is None:
            return Decision.TRANSMIT
        if abs(reading - self.last_transmitted_value) >= self.soft_threshold:
            return Decision.TRANSMIT
        return Decision.SLEEP

    def transmit(self, bs: BaseStation, radio: RadioParams, reading: Optional[float] = None,
                 round_index: Optional[int] = None, cost: Optional[float] = None) -> bool:
        """
        Send one packet to the base station, or die trying.

        Args:
            bs (BaseStation): Sink that counts the packet
            radio (RadioParams): Radio model for the transmission
            reading (float): Value carried by the packet, becomes the soft-threshold reference
            round_index (int): Current round, recorded on death
            cost (float): Precomputed transmission cost, computed when omitted

        Returns:
            bool: True if the packet was delivered
        """
        if not self.is_alive:
            raise NodeStateError(f"node {self.id} ({self.kind.value}) is dead")
        if cost is None:
            cost = self.tx_cost(radio)
        if self.residual_energy < cost:
            self.state = NodeState.DEAD
            self.death_round = round_index
            logger("nodes").info(f"Node {self.id} ({self.kind.value}) died at round {round_index} "
                                 f"after {self.tx_count} packets, residual {self.residual_energy:.3e} J")
            return False
        self.residual_energy -= cost
        self.spent_energy += cost
        self.tx_count += 1
        if reading is not None:
            self.last_transmitted_value = reading
        bs.receive(self.kind, self.payload_bits, radio, reading)
        return True


def decide(node: SensorNode, reading: float, round_index: int) -> Decision:
    return node.decide(reading, round_index)


def transmit(node: SensorNode, bs: BaseStation, radio: RadioParams, reading: Optional[float] = None,
             round_index: Optional[int] = None) -> bool:
    return node.transmit(bs, radio, reading, round_index)


def alive_count(nodes: Iterable[SensorNode]) -> int:
    return sum(1 for node in nodes if node.is_alive)
