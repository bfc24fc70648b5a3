"""Built-in and generated instances for the certification corpus."""
