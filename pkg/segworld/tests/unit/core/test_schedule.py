import numpy as np
import pytest

from segworld.core.exceptions import (
    MissingInstructionKind,
    MissingIntentInstruction,
    MissingSynthesizedContext,
)
from segworld.core.models import InstructionKind, ScheduleConfig, ScheduleState, SceneContext
from segworld.core.training.schedule import (
    ContextProvenance,
    choose_context,
    sample_instruction,
    self_context_probability,
)
from segworld.tests.factories import make_sample

SYNTHESIZED = SceneContext(
    scene=("a", "kitchen", "scene"), objects=("mug",), relations=(), events=()
)
GENERATED = SceneContext(scene=(), objects=("kettle",), relations=(), events=())


def without(sample, *kinds):
    instructions = {k: v for k, v in sample.instructions.items() if k not in kinds}
    return sample.model_copy(update={"instructions": instructions})


class TestSelfContextProbability:
    """Test suite for the linear warmup of self-generated contexts."""

    @pytest.mark.parametrize("step,expected", [(0, 0.0), (50, 0.25), (100, 0.5), (1000, 0.5)])
    def test_warmup_ramp(self, step, expected):
        schedule = ScheduleConfig(warmup_steps=100, p_max=0.5)

        assert self_context_probability(step, schedule) == expected

    def test_negative_step(self):
        with pytest.raises(ValueError):
            self_context_probability(-1, ScheduleConfig(warmup_steps=10))

    def test_state_advances(self):
        state = ScheduleState()

        assert [state.advance() for _ in range(3)] == [1, 2, 3]
        assert state.step == 3


class TestChooseContext:
    """Test suite for the per-sample context choice."""

    def test_always_synthesized_at_step_zero(self):
        rng = np.random.default_rng(0)
        schedule = ScheduleConfig(warmup_steps=10, p_max=1.0)

        choices = [choose_context(0, schedule, rng, SYNTHESIZED, GENERATED) for _ in range(50)]

        assert all(c.provenance == ContextProvenance.SYNTHESIZED for c in choices)
        assert not any(c.gradient_blocked for c in choices)

    def test_always_self_generated_at_p_one(self):
        rng = np.random.default_rng(0)
        schedule = ScheduleConfig(warmup_steps=10, p_max=1.0)

        choice = choose_context(10, schedule, rng, SYNTHESIZED, GENERATED)

        assert choice.context == GENERATED
        assert choice.gradient_blocked

    def test_empirical_rate(self):
        rng = np.random.default_rng(1)
        schedule = ScheduleConfig(warmup_steps=100, p_max=0.5)

        choices = [choose_context(50, schedule, rng, SYNTHESIZED, GENERATED) for _ in range(4000)]

        rate = np.mean([c.gradient_blocked for c in choices])
        assert rate == pytest.approx(0.25, abs=0.03)

    def test_missing_synthesized_context(self):
        with pytest.raises(MissingSynthesizedContext):
            choose_context(
                0, ScheduleConfig(warmup_steps=1), np.random.default_rng(0), None, GENERATED
            )


class TestSampleInstruction:
    """Test suite for the mixed instruction pool."""

    def test_no_intents_without_mix(self):
        rng = np.random.default_rng(0)
        sample = make_sample()

        kinds = {sample_instruction(sample, 0.0, rng).kind for _ in range(100)}

        assert kinds == {InstructionKind.REFERRING, InstructionKind.REASONING}

    def test_only_intents_at_full_mix(self):
        rng = np.random.default_rng(0)
        sample = make_sample()

        kinds = {sample_instruction(sample, 1.0, rng).kind for _ in range(20)}

        assert kinds == {InstructionKind.INTENT}

    def test_missing_intent(self):
        sample = without(make_sample(), InstructionKind.INTENT)

        with pytest.raises(MissingIntentInstruction):
            sample_instruction(sample, 0.5, np.random.default_rng(0))

    def test_missing_referential_kinds(self):
        sample = without(make_sample(), InstructionKind.REFERRING, InstructionKind.REASONING)

        with pytest.raises(MissingInstructionKind):
            sample_instruction(sample, 0.0, np.random.default_rng(0))
