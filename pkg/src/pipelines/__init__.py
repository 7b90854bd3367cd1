# Pipelines package