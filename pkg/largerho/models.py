from django.db import models


class Run(models.Model):
    """One invocation of a lab command: resolved config in, summary out."""

    STATUS_CHOICES = [
        ("OK", "Ok"),
        ("NUMERICAL_FAILURE", "Numerical failure"),
        ("CONFIG_ERROR", "Config error"),
    ]

    command = models.CharField(max_length=32)
    # resolved configuration, after config file, [common] and CLI merging
    config = models.JSONField(default=dict)
    summary = models.JSONField(default=dict, blank=True)
    status = models.CharField(max_length=24, choices=STATUS_CHOICES, default="OK")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.command} [{self.status}] #{self.pk}"
