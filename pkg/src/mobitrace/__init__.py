"""Mobile-Internet measurement analytics toolkit.

Ingests crowd-sourced measurement traces, attributes each measurement to
its limiting factor, classifies congestion from windowed sample
statistics, analyzes handovers and technology downgrades, and emits
plot-ready aggregate reports. A deterministic synthetic-trace generator
with planted ground truth makes every analysis verifiable end to end.
"""

__version__ = "0.1.0"
