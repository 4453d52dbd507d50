from .errors import NonPositiveConductivity, SynthError, UnstableFilter, WindowNotFound
from .movie import AMPLITUDE_FRAC, SIGMA_BG, conductivity_movie, lung_weights
from .signal import (
    FilterSpec,
    design_sos,
    global_signal,
    lowpass,
    select_window,
    synth_voltage,
)
from .subjects import (
    LABELS,
    Defect,
    LungGeometry,
    SubjectSpec,
    sample_subject_spec,
)
from .waveform import (
    ExpirationRecord,
    expiration_duration,
    expiration_record,
    ventilation_waveform,
)
