"""mindsynth: single-channel EEG telemetry in, three synchronized outputs
out: generative MIDI music, deterministic circle-field art frames, and
an installation lamp/spray command stream."""

__version__ = "0.1.0"
