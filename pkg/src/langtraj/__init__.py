"""Language-based assessments of interview transcripts and their association
with PTSD symptom severity and symptom trajectories."""

__version__ = "0.1.0"
