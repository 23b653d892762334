"""Architecture recovery for Python codebases.

Combines static call-graph extraction with runtime trace ingestion into a
single merged architecture model, and renders that model as DOT, GraphML,
JSON, or a force-directed SVG drawing.
"""

__version__ = "0.1.0"
