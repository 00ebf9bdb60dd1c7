from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Run',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=32)),
                ('config', models.JSONField(default=dict)),
                ('summary', models.JSONField(blank=True, default=dict)),
                ('status', models.CharField(choices=[('OK', 'Ok'), ('NUMERICAL_FAILURE', 'Numerical failure'), ('CONFIG_ERROR', 'Config error')], default='OK', max_length=24)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
