"""JSON document schemas and CSV row types."""
