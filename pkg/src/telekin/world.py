"""World objects and the block-stacking task layout.

Coordinates are meters, y up, table plane at y = 0.  Three cubes start in a
row in front of the operator and must be stacked in a fixed order on the
marked target.  Geometry is deliberately desk-scale; nothing here depends on
rendering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from telekin.geometry import Vec3


@dataclass(slots=True)
class ObjectState:
    id: str
    position: Vec3
    half_extent: Vec3
    selected: bool = False


@dataclass(slots=True)
class TaskState:
    blocks: list[ObjectState]
    target_base: Vec3
    required_order: list[str]
    stacked: list[str] = field(default_factory=list)
    complete: bool = False
    elapsed: float = 0.0

    def block(self, block_id: str) -> ObjectState:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise KeyError(block_id)

    def next_required(self) -> str | None:
        if len(self.stacked) >= len(self.required_order):
            return None
        return self.required_order[len(self.stacked)]

    def goal_slot(self, block_id: str) -> Vec3:
        """Center of the slot this block must reach: stack base plus the full
        heights of everything ordered beneath it."""
        idx = self.required_order.index(block_id)
        height = 0.0
        for earlier in self.required_order[:idx]:
            height += 2.0 * self.block(earlier).half_extent.y
        height += self.block(block_id).half_extent.y
        return Vec3(self.target_base.x, self.target_base.y + height, self.target_base.z)


BLOCK_HALF = 0.05  # 0.1 m cubes


def default_task() -> TaskState:
    he = Vec3(BLOCK_HALF, BLOCK_HALF, BLOCK_HALF)
    blocks = [
        ObjectState(id="red", position=Vec3(-0.25, BLOCK_HALF, 0.9), half_extent=he),
        ObjectState(id="green", position=Vec3(0.0, BLOCK_HALF, 0.9), half_extent=he),
        ObjectState(id="blue", position=Vec3(0.25, BLOCK_HALF, 0.9), half_extent=he),
    ]
    return TaskState(
        blocks=blocks,
        target_base=Vec3(0.55, 0.0, 0.9),
        required_order=["red", "green", "blue"],
    )


# Where the operator's head and resting hand sit relative to the table.
GAZE_ORIGIN = Vec3(0.0, 0.4, 0.0)
HAND_REST = Vec3(0.0, 0.0, 0.3)
