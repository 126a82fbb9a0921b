# Pydantic models for nestlab domain objects.
