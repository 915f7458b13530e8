from bitpart.simulation.harness import (
    CodebookBank,
    SweepPointError,
    SweepRow,
    TrialResult,
    allocate,
    draw_trajectory,
    feedback_grid,
    feedback_schedule,
    link_stats,
    run_sweep,
    run_trial,
    simulate,
    summarize,
)
from bitpart.simulation.random_streams import channel_generator, codebook_generator, make_generator, stream_seed
